#include <cstdlib>
#include <mutex>

#include <curl/curl.h>

#include "hunklabel/errors.hpp"
#include "hunklabel/llm_client.hpp"

namespace hunklabel {

namespace {

void ensure_curl_initialized() {
  static std::once_flag once;
  std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

std::size_t write_body(char* data, std::size_t size, std::size_t nmemb, void* user) {
  static_cast<std::string*>(user)->append(data, size * nmemb);
  return size * nmemb;
}

struct CurlHandle {
  CURL* handle = curl_easy_init();
  curl_slist* headers = nullptr;
  ~CurlHandle() {
    curl_slist_free_all(headers);
    if (handle) curl_easy_cleanup(handle);
  }
};

std::optional<std::size_t> usage_field(const nlohmann::json& usage,
                                       std::initializer_list<const char*> names) {
  for (const char* n : names)
    if (usage.contains(n) && usage.at(n).is_number_unsigned())
      return usage.at(n).get<std::size_t>();
  return std::nullopt;
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
  ensure_curl_initialized();
}

nlohmann::json HttpBackend::request_body(const PromptRequest& prompt) const {
  nlohmann::json body = {
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt.text}}})},
      {"temperature", config_.temperature},
  };
  if (config_.max_tokens) body["max_tokens"] = *config_.max_tokens;
  for (const auto& [k, v] : config_.extra_body.items()) body[k] = v;
  return body;
}

BackendReply HttpBackend::decode_reply(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw BackendError("backend returned a non-JSON completion body");
  BackendReply reply;
  try {
    reply.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw BackendError("completion body lacks choices[0].message.content");
  }
  if (j.contains("usage") && j.at("usage").is_object()) {
    const auto& u = j.at("usage");
    auto in = usage_field(u, {"prompt_tokens", "input_tokens"});
    auto out = usage_field(u, {"completion_tokens", "output_tokens"});
    if (in && out) reply.usage = TokenUsage{*in, *out, false};
  }
  return reply;
}

BackendReply HttpBackend::send(const PromptRequest& prompt) {
  CurlHandle curl;
  if (!curl.handle) throw TransportError("cannot create an HTTP handle");

  const std::string url = config_.endpoint + config_.path;
  const std::string payload = request_body(prompt).dump();
  std::string response;

  curl.headers = curl_slist_append(curl.headers, "Content-Type: application/json");
  if (!config_.token_env.empty()) {
    if (const char* token = std::getenv(config_.token_env.c_str()); token && *token) {
      std::string auth = std::string("Authorization: Bearer ") + token;
      curl.headers = curl_slist_append(curl.headers, auth.c_str());
    }
  }

  curl_easy_setopt(curl.handle, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.handle, CURLOPT_HTTPHEADER, curl.headers);
  curl_easy_setopt(curl.handle, CURLOPT_POSTFIELDS, payload.c_str());
  curl_easy_setopt(curl.handle, CURLOPT_POSTFIELDSIZE, static_cast<long>(payload.size()));
  curl_easy_setopt(curl.handle, CURLOPT_WRITEFUNCTION, write_body);
  curl_easy_setopt(curl.handle, CURLOPT_WRITEDATA, &response);
  curl_easy_setopt(curl.handle, CURLOPT_TIMEOUT_MS,
                   static_cast<long>(config_.timeout_seconds * 1000.0));
  curl_easy_setopt(curl.handle, CURLOPT_NOSIGNAL, 1L);

  CURLcode rc = curl_easy_perform(curl.handle);
  if (rc == CURLE_OPERATION_TIMEDOUT)
    throw TimeoutError("request to " + url + " timed out");
  if (rc != CURLE_OK)
    throw TransportError("request to " + url + " failed: " + curl_easy_strerror(rc));

  long status = 0;
  curl_easy_getinfo(curl.handle, CURLINFO_RESPONSE_CODE, &status);
  const std::string where = url + " returned HTTP " + std::to_string(status);
  if (status == 401 || status == 403) throw AuthError(where);
  if (status == 408 || status == 429 || status >= 500) throw TransportError(where);
  if (status < 200 || status >= 300) throw BackendError(where + ": " + response.substr(0, 200));
  return decode_reply(response);
}

}  // namespace hunklabel
