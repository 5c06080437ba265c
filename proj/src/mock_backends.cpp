#include "hunklabel/mock_backends.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hunklabel/errors.hpp"

namespace hunklabel {

void CallLog::record(const PromptRequest& p) {
  std::lock_guard lock(mu_);
  calls_.push_back(p);
}

std::vector<PromptRequest> CallLog::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t CallLog::count() const {
  std::lock_guard lock(mu_);
  return calls_.size();
}

std::size_t CallLog::count(TemplateKind kind) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(
      calls_.begin(), calls_.end(), [kind](const auto& c) { return c.kind == kind; }));
}

std::string ScriptedBackend::key_for(const PromptRequest& p) {
  const std::string first = p.covered_hunks.empty() ? "0" : std::to_string(p.covered_hunks.front());
  switch (p.kind) {
    case TemplateKind::LabelerHunk: return "hunk-" + first;
    case TemplateKind::LabelerFile: return "file-" + first;
    case TemplateKind::LabelerPatch: return "patch";
    case TemplateKind::Refiner: return "refiner";
  }
  return "";
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw ConfigError("scripted reply directory " + dir.string() + " does not exist");
  auto backend = std::make_shared<ScriptedBackend>();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext != ".json" && ext != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string key = entry.path().stem().string();
    if (key == "default") backend->set_default(ss.str());
    else backend->set_reply(key, ss.str());
  }
  return backend;
}

void ScriptedBackend::set_reply(std::string key, std::string reply) {
  std::lock_guard lock(mu_);
  replies_[std::move(key)] = std::move(reply);
}

void ScriptedBackend::set_default(std::string reply) {
  std::lock_guard lock(mu_);
  default_reply_ = std::move(reply);
}

void ScriptedBackend::set_usage(TokenUsage usage) {
  std::lock_guard lock(mu_);
  usage_ = usage;
}

BackendReply ScriptedBackend::send(const PromptRequest& prompt) {
  log_.record(prompt);
  const std::string key = key_for(prompt);
  std::lock_guard lock(mu_);
  BackendReply reply;
  reply.usage = usage_;
  if (auto it = replies_.find(key); it != replies_.end()) {
    reply.text = it->second;
  } else if (default_reply_) {
    reply.text = *default_reply_;
  } else {
    throw TransportError("no scripted reply for '" + key + "'");
  }
  return reply;
}

OracleBackend::OracleBackend(LabelingSet ground_truth)
    : gt_(std::move(ground_truth)), types_(per_hunk_types(gt_)) {}

std::uint64_t OracleBackend::pipeline_id(std::uint32_t hunk, LabelType t) const {
  if (hunk == 0 || hunk > types_.size()) return 0;
  const TypeSet& types = types_[hunk - 1];
  auto it = types.find(t);
  if (it == types.end()) return 0;
  return instance_id_for(hunk, static_cast<std::uint32_t>(std::distance(types.begin(), it)));
}

std::string OracleBackend::labeler_reply(const PromptRequest& p) const {
  auto entry_for = [this](std::uint32_t h) {
    nlohmann::json names = nlohmann::json::array();
    if (h >= 1 && h <= types_.size())
      for (auto t : types_[h - 1]) names.push_back(std::string(snake_name(t)));
    return nlohmann::json{{"reasoning", "ground truth"}, {"label_names", std::move(names)}};
  };
  nlohmann::json body;
  if (p.kind == TemplateKind::LabelerHunk && p.covered_hunks.size() == 1) {
    body = entry_for(p.covered_hunks.front());
  } else {
    nlohmann::json dict = nlohmann::json::object();
    for (auto h : p.covered_hunks) dict[std::to_string(h)] = entry_for(h);
    body = {{"response_dict", std::move(dict)}};
  }
  return "<json>\n" + body.dump(2) + "\n</json>";
}

std::string OracleBackend::refiner_reply(const PromptRequest& p) const {
  nlohmann::json dict = nlohmann::json::object();
  for (const auto& label : p.covered_labels) {
    nlohmann::json entry{{"reasoning", "ground truth"}};
    if (!label.type) {
      entry["updated_type"] = "NONE";
      entry["attributes"] = nlohmann::json::array();
      entry["parent_id"] = "0";
      dict[std::to_string(label.id)] = std::move(entry);
      continue;
    }
    const LabelType t = *label.type;
    std::vector<const LabelingInstance*> matching;
    for (const auto& inst : gt_.instances)
      if (inst.hunk_index == label.hunk_index && inst.label_type == t) matching.push_back(&inst);

    nlohmann::json attrs = nlohmann::json::array();
    std::uint64_t parent = 0;
    if (!matching.empty()) {
      if (info(t).needs_attributes)
        for (const auto* inst : matching)
          for (const auto& a : inst->attributes) attrs.push_back(a);
      if (const auto* gt_parent = gt_.find(matching.front()->parent_id))
        parent = pipeline_id(gt_parent->hunk_index, gt_parent->label_type);
    }
    entry["updated_type"] = std::string(upper_name(t));
    entry["attributes"] = std::move(attrs);
    entry["parent_id"] = std::to_string(parent);
    dict[std::to_string(label.id)] = std::move(entry);
  }
  nlohmann::json body{{"response_dict", std::move(dict)}};
  return "<json>\n" + body.dump(2) + "\n</json>";
}

BackendReply OracleBackend::send(const PromptRequest& prompt) {
  log_.record(prompt);
  BackendReply reply;
  reply.text = prompt.kind == TemplateKind::Refiner ? refiner_reply(prompt) : labeler_reply(prompt);
  return reply;
}

FailingBackend::FailingBackend(std::shared_ptr<Backend> inner, std::vector<Fault> script,
                               std::set<std::uint32_t> failing_hunks)
    : inner_(std::move(inner)), script_(std::move(script)), failing_hunks_(std::move(failing_hunks)) {}

std::size_t FailingBackend::attempts() const {
  std::lock_guard lock(mu_);
  return attempts_;
}

BackendReply FailingBackend::send(const PromptRequest& prompt) {
  Fault fault = Fault::None;
  {
    std::lock_guard lock(mu_);
    if (attempts_ < script_.size()) fault = script_[attempts_];
    ++attempts_;
  }
  for (auto h : prompt.covered_hunks)
    if (failing_hunks_.contains(h))
      throw TransportError("scripted failure for hunk " + std::to_string(h));
  switch (fault) {
    case Fault::Transport: throw TransportError("scripted transport failure");
    case Fault::Timeout: throw TimeoutError("scripted timeout");
    case Fault::Auth: throw AuthError("scripted authentication failure");
    case Fault::None: break;
  }
  if (!inner_) throw TransportError("no backend behind the fault injector");
  return inner_->send(prompt);
}

}  // namespace hunklabel
