#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hunklabel/llm_client.hpp"
#include "hunklabel/taxonomy.hpp"

namespace hunklabel {

// Thread-safe record of the requests a test double has seen.
class CallLog {
 public:
  void record(const PromptRequest& p);
  std::vector<PromptRequest> calls() const;
  std::size_t count() const;
  std::size_t count(TemplateKind kind) const;

 private:
  mutable std::mutex mu_;
  std::vector<PromptRequest> calls_;
};

// Canned replies looked up by request key:
//   hunk-<h>     per-hunk labeler request for hunk h
//   file-<h>     per-file labeler request whose first hunk is h
//   patch        per-patch labeler request
//   refiner      refiner request
// A request with no matching key gets the default reply, or TransportError
// when there is none.
class ScriptedBackend final : public Backend {
 public:
  static std::string key_for(const PromptRequest& p);

  // Reads <key>.json or <key>.txt files; "default.*" sets the default reply.
  static std::shared_ptr<ScriptedBackend> from_directory(const std::filesystem::path& dir);

  void set_reply(std::string key, std::string reply);
  void set_default(std::string reply);
  // Reported with every reply; without it usage is left to estimation.
  void set_usage(TokenUsage usage);

  BackendReply send(const PromptRequest& prompt) override;
  const CallLog& log() const { return log_; }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> replies_;
  std::optional<std::string> default_reply_;
  std::optional<TokenUsage> usage_;
  CallLog log_;
};

// Answers every prompt from a ground-truth labeling. Labeler replies carry
// T_GT(h); refiner replies reproduce the ground truth's types, attribute
// triples and parent hunks in terms of the ids the pipeline assigned.
class OracleBackend final : public Backend {
 public:
  explicit OracleBackend(LabelingSet ground_truth);

  BackendReply send(const PromptRequest& prompt) override;
  const CallLog& log() const { return log_; }

  // Id the pipeline gives label `t` on hunk `h` when the labeler returns
  // exactly T_GT(h); 0 when t is not in T_GT(h).
  std::uint64_t pipeline_id(std::uint32_t hunk, LabelType t) const;

 private:
  std::string labeler_reply(const PromptRequest& p) const;
  std::string refiner_reply(const PromptRequest& p) const;

  LabelingSet gt_;
  std::vector<TypeSet> types_;
  CallLog log_;
};

enum class Fault { None, Transport, Timeout, Auth };

// Injects scripted faults in front of another backend. Call i (0-based)
// raises script[i]; later calls, and Fault::None entries, go to `inner`.
// Requests covering any hunk in `failing_hunks` always raise TransportError.
class FailingBackend final : public Backend {
 public:
  FailingBackend(std::shared_ptr<Backend> inner, std::vector<Fault> script,
                 std::set<std::uint32_t> failing_hunks = {});

  BackendReply send(const PromptRequest& prompt) override;
  std::size_t attempts() const;

 private:
  std::shared_ptr<Backend> inner_;
  std::vector<Fault> script_;
  std::set<std::uint32_t> failing_hunks_;
  mutable std::mutex mu_;
  std::size_t attempts_ = 0;
};

}  // namespace hunklabel
