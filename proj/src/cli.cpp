#include "hunklabel/cli.hpp"

#include <cstdlib>
#include <cstdio>
#include <memory>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hunklabel/bundle_io.hpp"
#include "hunklabel/errors.hpp"
#include "hunklabel/evaluation.hpp"
#include "hunklabel/labeler.hpp"
#include "hunklabel/labeling_json.hpp"
#include "hunklabel/mock_backends.hpp"
#include "hunklabel/refiner.hpp"

namespace fs = std::filesystem;

namespace hunklabel {

namespace {

const std::vector<std::string>& value_keys() {
  static const std::vector<std::string> keys{
      "mode",   "backend", "model",    "context-lines", "parallel",   "diff",
      "files-dir", "ground-truth", "labels", "prediction", "scripts", "templates",
      "out",    "endpoint", "token-env"};
  return keys;
}

const std::vector<std::string>& flag_keys() {
  static const std::vector<std::string> keys{"dry-run", "skip-refiner"};
  return keys;
}

std::string env_name(const std::string& key) {
  std::string out = "HUNKLABEL_";
  for (char c : key) out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(c)));
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& v, bool allow_zero) {
  std::size_t pos = 0;
  long long n = -1;
  try {
    n = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || n < 0 || (!allow_zero && n == 0))
    throw ConfigError(key + ": expected a " + (allow_zero ? "non-negative" : "positive") +
                      " integer, got '" + v + "'");
  return static_cast<std::size_t>(n);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off" || v.empty()) return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  throw ConfigError("config values must be strings, integers or booleans");
}

std::string dump(const nlohmann::json& j) {
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text_file(path, dump(j)); }

struct Context {
  RunConfig cfg;
  std::ostream& out;
  std::ostream& err;
};

PromptLibrary load_prompts(const RunConfig& cfg) {
  return cfg.templates ? PromptLibrary::load(*cfg.templates) : PromptLibrary::load_default();
}

PatchBundle load_input_patch(const RunConfig& cfg) {
  if (!cfg.diff) throw ConfigError("no diff given (--diff)");
  return load_patch(*cfg.diff, cfg.files_dir);
}

std::optional<LabelingSet> load_ground_truth(const RunConfig& cfg, std::size_t hunk_count) {
  if (!cfg.ground_truth) return std::nullopt;
  return load_labeling(*cfg.ground_truth, hunk_count);
}

std::shared_ptr<Backend> make_backend(const RunConfig& cfg, const std::optional<LabelingSet>& gt) {
  switch (cfg.backend) {
    case BackendKind::Oracle:
      if (!gt) throw ConfigError("the oracle backend needs --ground-truth");
      return std::make_shared<OracleBackend>(*gt);
    case BackendKind::Scripted:
      if (!cfg.scripts) throw ConfigError("the scripted backend needs --scripts");
      return ScriptedBackend::from_directory(*cfg.scripts);
    case BackendKind::Http:
      if (cfg.http.model.empty()) throw ConfigError("the http backend needs --model");
      return make_http_backend(cfg.http);
  }
  throw ConfigError("unknown backend");
}

void require_valid(const LabelingSet& set, const std::string& what) {
  const auto violations = validate(set);
  if (violations.empty()) return;
  throw SchemaError(what + " is invalid: " + violations.front().message);
}

void write_prompts(const fs::path& dir, const std::vector<PromptRequest>& requests,
                   const std::string& stem) {
  for (std::size_t i = 0; i < requests.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%03zu.txt", stem.c_str(), i + 1);
    write_text_file(dir / name, requests[i].text);
  }
}

struct LabelStage {
  LabelingSet set;
  LabelerRun run;
};

// Returns nullopt on a dry run.
std::optional<LabelStage> do_label(Context& ctx, const PatchBundle& bundle,
                                   const std::optional<LabelingSet>& gt) {
  const auto& cfg = ctx.cfg;
  const PromptLibrary lib = load_prompts(cfg);
  LabelerOptions opts{cfg.context_lines, cfg.parallel};
  if (cfg.dry_run) {
    const auto requests = labeler_requests(bundle, cfg.mode, lib, opts);
    write_prompts(cfg.out / "prompts", requests, "labeler");
    ctx.out << "dry run: " << requests.size() << " labeler prompt(s) written to "
            << (cfg.out / "prompts").string() << "\n";
    return std::nullopt;
  }
  auto backend = make_backend(cfg, gt);
  auto [set, run] = run_labeler(bundle, cfg.mode, *backend, lib, opts);
  require_valid(set, "labeler output");
  save_labeling(cfg.out / "labels.json", set);
  write_json(cfg.out / "label_report.json", run_report_json(run));
  ctx.out << "labeled " << bundle.hunk_count() << " hunk(s) with " << run.requests
          << " request(s), " << set.instances.size() << " instance(s)\n";
  for (const auto& f : run.failures) ctx.err << "warning: request " << f.request_index + 1
                                             << " failed: " << f.error << "\n";
  if (!run.failures.empty() && run.failures.size() == run.requests)
    throw BackendError("every labeler request failed");
  return LabelStage{std::move(set), std::move(run)};
}

LabelingSet do_refine(Context& ctx, const PatchBundle& bundle, const LabelingSet& labels,
                      const std::optional<LabelingSet>& gt) {
  const auto& cfg = ctx.cfg;
  RefinementResult res;
  if (cfg.skip_refiner) {
    res.set = labels;
    res.report.skipped = true;
    res.report.warnings.push_back("refiner skipped on request");
  } else {
    auto backend = make_backend(cfg, gt);
    res = run_refiner(bundle, labels, *backend, load_prompts(cfg), cfg.context_lines);
  }
  require_valid(res.set, "refined output");
  save_labeling(cfg.out / "refined.json", res.set);
  write_json(cfg.out / "refine_report.json", refinement_report_json(res.report));
  if (res.report.skipped)
    ctx.out << "refiner skipped: " << (cfg.skip_refiner ? "--skip-refiner given" : "no eligible hunks")
            << ", labels copied unchanged\n";
  else
    ctx.out << "refined: " << res.report.type_changes.size() << " type change(s), "
            << res.report.splits.size() << " split(s), " << res.report.repaired_parents.size()
            << " repaired parent(s)\n";
  for (const auto& w : res.report.warnings) ctx.err << "warning: " << w << "\n";
  return res.set;
}

void write_evaluation(Context& ctx, const EvaluationReport& r, const std::string& stem) {
  write_json(ctx.cfg.out / (stem + ".json"), report_json(r));
  write_text_file(ctx.cfg.out / (stem + ".txt"), report_table(r));
}

int cmd_label(Context& ctx) {
  const PatchBundle bundle = load_input_patch(ctx.cfg);
  const auto gt = load_ground_truth(ctx.cfg, bundle.hunk_count());
  do_label(ctx, bundle, gt);
  return 0;
}

int cmd_refine(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const PatchBundle bundle = load_input_patch(cfg);
  const fs::path labels_path = cfg.labels ? *cfg.labels : cfg.out / "labels.json";
  if (!fs::is_regular_file(labels_path))
    throw ConfigError("labeler output " + labels_path.string() + " not found (--labels)");
  const LabelingSet labels = load_labeling(labels_path, bundle.hunk_count());
  require_valid(labels, labels_path.string());
  const auto gt = load_ground_truth(cfg, bundle.hunk_count());
  if (cfg.dry_run) {
    const auto plan = plan_refinement(bundle, labels, cfg.context_lines);
    if (plan.empty()) {
      ctx.out << "dry run: no eligible hunks, refiner would be skipped\n";
      return 0;
    }
    write_prompts(cfg.out / "prompts", {render_refiner_prompt(load_prompts(cfg), plan.entries)},
                  "refiner");
    ctx.out << "dry run: refiner prompt written to " << (cfg.out / "prompts").string() << "\n";
    return 0;
  }
  do_refine(ctx, bundle, labels, gt);
  return 0;
}

int cmd_run(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const PatchBundle bundle = load_input_patch(cfg);
  const auto gt = load_ground_truth(cfg, bundle.hunk_count());
  auto stage = do_label(ctx, bundle, gt);
  if (!stage) return 0;
  const LabelingSet refined = do_refine(ctx, bundle, stage->set, gt);
  if (!gt) return 0;

  const auto [in, out] = cost_per_hunk(stage->run, bundle.hunk_count());
  const CostInfo cost{in, out, stage->run.usage.estimated};
  const EvaluationReport before = evaluate(stage->set, *gt, cost);
  const EvaluationReport after = evaluate(refined, *gt, cost);
  write_evaluation(ctx, before, "labeler_evaluation");
  write_evaluation(ctx, after, "evaluation");
  write_text_file(cfg.out / "per_type.csv", per_type_csv(after));
  ctx.out << report_table(after);
  return 0;
}

int cmd_evaluate(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (!cfg.ground_truth) throw ConfigError("no ground truth given (--ground-truth)");
  const fs::path pred_path = cfg.prediction ? *cfg.prediction : cfg.out / "refined.json";
  std::optional<std::size_t> hunks;
  if (cfg.diff) hunks = load_input_patch(cfg).hunk_count();
  const LabelingSet gt = load_labeling(*cfg.ground_truth, hunks);
  const LabelingSet pred = load_labeling(pred_path, hunks);
  require_valid(gt, cfg.ground_truth->string());
  require_valid(pred, pred_path.string());
  const EvaluationReport r = evaluate(pred, gt);
  write_evaluation(ctx, r, "evaluation");
  write_text_file(cfg.out / "per_type.csv", per_type_csv(r));
  ctx.out << report_table(r);
  return 0;
}

}  // namespace

ConfigLayer config_from_env() {
  ConfigLayer layer;
  auto grab = [&](const std::string& key) {
    if (const char* v = std::getenv(env_name(key).c_str()); v && *v) layer[key] = v;
  };
  for (const auto& k : value_keys()) grab(k);
  for (const auto& k : flag_keys()) grab(k);
  return layer;
}

ConfigLayer config_from_file(const fs::path& path, BackendConfig& http) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path.string() + ": expected a JSON object");

  ConfigLayer layer;
  auto known = [](const std::string& key) {
    for (const auto* keys : {&value_keys(), &flag_keys()})
      for (const auto& k : *keys)
        if (k == key) return true;
    return false;
  };
  for (const auto& [raw_key, v] : j.items()) {
    std::string key = raw_key;
    for (auto& c : key)
      if (c == '_') c = '-';
    if (key == "http") {
      if (!v.is_object()) throw ConfigError(path.string() + ": \"http\" must be an object");
      nlohmann::json rest = nlohmann::json::object();
      for (const auto& [hk, hv] : v.items()) {
        if (hk == "endpoint" || hk == "model") layer[hk] = json_scalar(hv);
        else if (hk == "token_env") layer["token-env"] = json_scalar(hv);
        else rest[hk] = hv;
      }
      const BackendConfig parsed = BackendConfig::from_json(rest);
      if (rest.contains("path")) http.path = parsed.path;
      if (rest.contains("timeout_seconds")) http.timeout_seconds = parsed.timeout_seconds;
      if (rest.contains("max_retries")) http.max_retries = parsed.max_retries;
      if (rest.contains("temperature")) http.temperature = parsed.temperature;
      if (rest.contains("max_tokens")) http.max_tokens = parsed.max_tokens;
      if (rest.contains("extra_body")) http.extra_body = parsed.extra_body;
      continue;
    }
    if (!known(key)) throw ConfigError(path.string() + ": unknown key '" + raw_key + "'");
    layer[key] = json_scalar(v);
  }
  return layer;
}

void apply_layer(RunConfig& cfg, const ConfigLayer& layer) {
  for (const auto& [key, v] : layer) {
    if (key == "mode") {
      auto m = labeler_mode_from_name(v);
      if (!m) throw ConfigError("mode: expected hunk, file or patch, got '" + v + "'");
      cfg.mode = *m;
    } else if (key == "backend") {
      if (v == "oracle") cfg.backend = BackendKind::Oracle;
      else if (v == "scripted") cfg.backend = BackendKind::Scripted;
      else if (v == "http") cfg.backend = BackendKind::Http;
      else throw ConfigError("backend: expected oracle, scripted or http, got '" + v + "'");
    } else if (key == "context-lines") {
      cfg.context_lines = parse_count(key, v, true);
    } else if (key == "parallel") {
      cfg.parallel = parse_count(key, v, false);
    } else if (key == "diff") {
      cfg.diff = v;
    } else if (key == "files-dir") {
      cfg.files_dir = v;
    } else if (key == "ground-truth") {
      cfg.ground_truth = v;
    } else if (key == "labels") {
      cfg.labels = v;
    } else if (key == "prediction") {
      cfg.prediction = v;
    } else if (key == "scripts") {
      cfg.scripts = v;
    } else if (key == "templates") {
      cfg.templates = v;
    } else if (key == "out") {
      cfg.out = v;
    } else if (key == "model") {
      cfg.http.model = v;
    } else if (key == "endpoint") {
      cfg.http.endpoint = v;
    } else if (key == "token-env") {
      cfg.http.token_env = v;
    } else if (key == "dry-run") {
      cfg.dry_run = parse_bool(key, v);
    } else if (key == "skip-refiner") {
      cfg.skip_refiner = parse_bool(key, v);
    } else {
      throw ConfigError("unknown setting '" + key + "'");
    }
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Label the diff hunks of a patch with change types"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::string config;
  };
  std::map<std::string, Sub> subs;
  auto add_sub = [&](const std::string& name, const std::string& help) {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help);
    auto* a = s.app;
    a->add_option("--config", s.config, "JSON config file");
    a->add_option("--mode", s.values["mode"], "hunk, file or patch");
    a->add_option("--backend", s.values["backend"], "oracle, scripted or http");
    a->add_option("--model", s.values["model"], "model name for the http backend");
    a->add_option("--endpoint", s.values["endpoint"], "base URL of the http backend");
    a->add_option("--token-env", s.values["token-env"],
                  "name of the environment variable holding the API token");
    a->add_option("--context-lines", s.values["context-lines"], "context lines around hunks (5)");
    a->add_option("--parallel", s.values["parallel"], "concurrent labeler requests");
    a->add_option("--diff", s.values["diff"], "unified diff to label");
    a->add_option("--files-dir", s.values["files-dir"], "directory with old/ and new/ file trees");
    a->add_option("--ground-truth", s.values["ground-truth"], "ground-truth labeling JSON");
    a->add_option("--labels", s.values["labels"], "labeler output to refine");
    a->add_option("--prediction", s.values["prediction"], "labeling to evaluate");
    a->add_option("--scripts", s.values["scripts"], "reply directory for the scripted backend");
    a->add_option("--templates", s.values["templates"], "prompt resource directory");
    a->add_option("--out", s.values["out"], "output directory");
    a->add_flag("--dry-run", s.flags["dry-run"], "write prompts, send nothing");
    a->add_flag("--skip-refiner", s.flags["skip-refiner"], "copy labeler output as refined");
  };
  add_sub("label", "run the labeler");
  add_sub("refine", "run the refiner on labeler output");
  add_sub("run", "label, refine and, given ground truth, evaluate");
  add_sub("evaluate", "score a labeling against ground truth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  for (auto& [name, s] : subs) {
    if (!s.app->parsed()) continue;
    Context ctx{RunConfig{}, out, err};
    try {
      apply_layer(ctx.cfg, config_from_env());
      std::string config_path = s.config;
      if (config_path.empty())
        if (const char* v = std::getenv("HUNKLABEL_CONFIG"); v && *v) config_path = v;
      if (!config_path.empty()) apply_layer(ctx.cfg, config_from_file(config_path, ctx.cfg.http));
      ConfigLayer flags;
      for (const auto& [key, v] : s.values)
        if (s.app->get_option("--" + key)->count() > 0) flags[key] = v;
      for (const auto& [key, v] : s.flags)
        if (v) flags[key] = "true";
      apply_layer(ctx.cfg, flags);
      fs::create_directories(ctx.cfg.out);

      if (name == "label") return cmd_label(ctx);
      if (name == "refine") return cmd_refine(ctx);
      if (name == "run") return cmd_run(ctx);
      return cmd_evaluate(ctx);
    } catch (const std::exception& e) {
      err << "hunklabel " << name << ": " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}

}  // namespace hunklabel
