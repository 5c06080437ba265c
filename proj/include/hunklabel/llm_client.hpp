#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hunklabel/prompting.hpp"
#include "hunklabel/taxonomy.hpp"

namespace hunklabel {

struct TokenUsage {
  std::size_t input_tokens = 0;
  std::size_t output_tokens = 0;
  bool estimated = false;

  TokenUsage& operator+=(const TokenUsage& o) {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    estimated = estimated || o.estimated;
    return *this;
  }
};

// What a backend hands back for one request. `usage` is empty when the
// provider did not report it.
struct BackendReply {
  std::string text;
  std::optional<TokenUsage> usage;
};

// One single-turn completion endpoint. Implementations must tolerate
// concurrent send() calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendReply send(const PromptRequest& prompt) = 0;
};

struct LlmResponse {
  std::string raw_text;
  std::optional<nlohmann::json> parsed;  // sanitized payload, if it is JSON
  TokenUsage usage;
};

// Sends the prompt and fills in estimated usage when the backend reports
// none. Throws EmptyInput for an empty prompt; backend errors propagate.
LlmResponse complete(Backend& backend, const PromptRequest& prompt);

struct RetryPolicy {
  unsigned max_retries = 2;
  std::chrono::milliseconds initial_delay{500};
  double backoff_factor = 2.0;
  std::chrono::milliseconds max_delay{8000};

  std::chrono::milliseconds delay_for(unsigned attempt) const;  // attempt >= 1
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Retries TransportError and TimeoutError with exponential backoff. Auth and
// other errors pass through on the first occurrence.
class RetryingBackend final : public Backend {
 public:
  RetryingBackend(std::shared_ptr<Backend> inner, RetryPolicy policy, Sleeper sleep = {});
  BackendReply send(const PromptRequest& prompt) override;

 private:
  std::shared_ptr<Backend> inner_;
  RetryPolicy policy_;
  Sleeper sleep_;
};

struct BackendConfig {
  std::string endpoint;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string token_env = "OPENAI_API_KEY";  // name of the variable, never the secret
  double timeout_seconds = 120.0;
  unsigned max_retries = 2;
  double temperature = 0.0;
  std::optional<int> max_tokens;
  nlohmann::json extra_body = nlohmann::json::object();

  // Throws ConfigError.
  void validate() const;
  // Reads the known keys of a JSON object; unknown keys are rejected.
  static BackendConfig from_json(const nlohmann::json& j);
};

// OpenAI-style chat-completion endpoint over HTTP(S); one attempt per send().
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);
  BackendReply send(const PromptRequest& prompt) override;

  // Exposed for tests: request body and reply decoding.
  nlohmann::json request_body(const PromptRequest& prompt) const;
  static BackendReply decode_reply(std::string_view body);

 private:
  BackendConfig config_;
};

// HttpBackend wrapped in the retry policy the config asks for.
std::shared_ptr<Backend> make_http_backend(const BackendConfig& config, Sleeper sleep = {});

LlmResponse complete(const BackendConfig& config, const PromptRequest& prompt);

// Extracts the payload between <json> and </json>, else strips Markdown
// code fences, else trims; repeated until stable. Throws NoPayload when
// nothing is left.
std::string sanitize(std::string_view raw);

enum class ReplyWarningKind {
  MissingEntry,
  UnexpectedEntry,
  UnknownLabel,
  BadEntry,
  AttributesTruncated,
  AttributesDropped,
};

std::string_view to_string(ReplyWarningKind k);

struct ReplyWarning {
  ReplyWarningKind kind;
  std::string key;
  std::string message;
};

struct LabelerEntry {
  std::string reasoning;
  std::vector<LabelType> labels;  // reply order, duplicates removed
};

struct LabelerReply {
  std::map<std::uint32_t, LabelerEntry> entries;  // one per expected hunk
  std::vector<ReplyWarning> warnings;
};

// `raw` may still carry wrappers; it is sanitized first. Throws SchemaError
// when the payload is not a JSON object of the expected shape.
LabelerReply parse_labeler_reply(std::string_view raw, LabelerMode mode,
                                 std::span<const std::uint32_t> expected_hunks);

struct RefinerEntry {
  std::string reasoning;
  std::optional<LabelType> updated_type;  // empty: keep, or clear if clears_type
  bool clears_type = false;               // updated_type "NONE"
  std::vector<std::string> attributes;    // trimmed
  std::uint64_t parent_id = 0;
  bool defaulted = false;                 // no usable entry in the reply
};

struct RefinerReply {
  std::map<std::uint64_t, RefinerEntry> entries;  // one per expected label
  std::vector<ReplyWarning> warnings;
};

RefinerReply parse_refiner_reply(std::string_view raw, std::span<const StreamLabel> expected);

}  // namespace hunklabel
