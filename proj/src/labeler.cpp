#include "hunklabel/labeler.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>

#include "hunklabel/errors.hpp"

namespace hunklabel {

std::vector<StreamHunk> build_stream(const PatchBundle& bundle, std::size_t context_width) {
  std::vector<StreamHunk> out;
  for (const auto& file : bundle.files)
    for (const auto& hunk : file.hunks)
      out.push_back({file.path(), &hunk, extract_context(hunk, bundle, context_width)});
  return out;
}

std::vector<PromptRequest> labeler_requests(const PatchBundle& bundle, LabelerMode mode,
                                            const PromptLibrary& lib,
                                            const LabelerOptions& options) {
  const auto stream = build_stream(bundle, options.context_width);
  if (stream.empty()) throw EmptyInput("patch has no diff hunks");

  std::vector<PromptRequest> out;
  std::span<const StreamHunk> all(stream);
  switch (mode) {
    case LabelerMode::Hunk:
      for (std::size_t i = 0; i < all.size(); ++i)
        out.push_back(render_labeler_prompt(lib, mode, all.subspan(i, 1)));
      break;
    case LabelerMode::File: {
      std::size_t begin = 0;
      while (begin < all.size()) {
        std::size_t end = begin + 1;
        while (end < all.size() && all[end].file_path == all[begin].file_path) ++end;
        out.push_back(render_labeler_prompt(lib, mode, all.subspan(begin, end - begin)));
        begin = end;
      }
      break;
    }
    case LabelerMode::Patch:
      out.push_back(render_labeler_prompt(lib, mode, all));
      break;
  }
  return out;
}

LabelingSet labeling_from_types(const std::vector<TypeSet>& types) {
  LabelingSet set;
  set.hunk_count = types.size();
  for (std::size_t h = 0; h < types.size(); ++h) {
    std::uint32_t ordinal = 0;
    for (auto t : types[h]) {
      LabelingInstance inst;
      inst.hunk_index = static_cast<std::uint32_t>(h + 1);
      inst.id = instance_id_for(inst.hunk_index, ordinal++);
      inst.label_type = t;
      set.instances.push_back(std::move(inst));
    }
  }
  return set;
}

namespace {

struct RequestOutcome {
  std::optional<LabelerReply> reply;
  TokenUsage usage;
  std::string error;
  std::exception_ptr fatal;
};

RequestOutcome execute(Backend& backend, const PromptRequest& req, LabelerMode mode) {
  RequestOutcome out;
  try {
    LlmResponse resp = complete(backend, req);
    out.usage = resp.usage;
    out.reply = parse_labeler_reply(resp.raw_text, mode, req.covered_hunks);
  } catch (const AuthError&) {
    out.fatal = std::current_exception();
  } catch (const BackendError& e) {
    if (mode == LabelerMode::Patch) out.fatal = std::current_exception();
    out.error = e.what();
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::pair<LabelingSet, LabelerRun> run_labeler(const PatchBundle& bundle, LabelerMode mode,
                                               Backend& backend, const PromptLibrary& lib,
                                               const LabelerOptions& options) {
  const auto requests = labeler_requests(bundle, mode, lib, options);
  std::vector<RequestOutcome> outcomes(requests.size());

  const std::size_t workers =
      std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(requests.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < requests.size(); ++i) {
      outcomes[i] = execute(backend, requests[i], mode);
      if (outcomes[i].fatal) break;
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < requests.size() && !stop; i = next++) {
          outcomes[i] = execute(backend, requests[i], mode);
          if (outcomes[i].fatal) stop = true;
        }
      });
    }
  }

  LabelerRun run;
  run.mode = mode;
  run.requests = requests.size();
  run.types.assign(bundle.hunk_count(), {});
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    if (o.fatal) std::rethrow_exception(o.fatal);
    run.usage += o.usage;
    if (!o.reply) {
      if (!o.error.empty()) run.failures.push_back({i, requests[i].covered_hunks, o.error});
      continue;
    }
    for (const auto& [h, entry] : o.reply->entries)
      if (h >= 1 && h <= run.types.size())
        run.types[h - 1].insert(entry.labels.begin(), entry.labels.end());
    run.warnings.insert(run.warnings.end(), o.reply->warnings.begin(), o.reply->warnings.end());
  }
  return {labeling_from_types(run.types), std::move(run)};
}

std::pair<double, double> cost_per_hunk(const LabelerRun& run, std::size_t hunk_count) {
  if (hunk_count == 0) throw std::invalid_argument("hunk count must be positive");
  const double n = static_cast<double>(hunk_count);
  return {static_cast<double>(run.usage.input_tokens) / n,
          static_cast<double>(run.usage.output_tokens) / n};
}

nlohmann::json warnings_json(const std::vector<ReplyWarning>& warnings) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& w : warnings)
    out.push_back({{"kind", std::string(to_string(w.kind))}, {"key", w.key}, {"message", w.message}});
  return out;
}

nlohmann::json run_report_json(const LabelerRun& run) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : run.failures)
    failures.push_back({{"request", f.request_index}, {"hunks", f.hunks}, {"error", f.error}});
  nlohmann::json types = nlohmann::json::object();
  for (std::size_t h = 0; h < run.types.size(); ++h) {
    nlohmann::json names = nlohmann::json::array();
    for (auto t : run.types[h]) names.push_back(std::string(upper_name(t)));
    types[std::to_string(h + 1)] = std::move(names);
  }
  const auto [in, out] = run.types.empty() ? std::pair{0.0, 0.0} : cost_per_hunk(run, run.types.size());
  return {
      {"mode", std::string(to_string(run.mode))},
      {"requests", run.requests},
      {"usage",
       {{"input_tokens", run.usage.input_tokens},
        {"output_tokens", run.usage.output_tokens},
        {"estimated", run.usage.estimated}}},
      {"cost_per_hunk", {{"input", in}, {"output", out}}},
      {"types", std::move(types)},
      {"warnings", warnings_json(run.warnings)},
      {"failures", std::move(failures)},
  };
}

}  // namespace hunklabel
