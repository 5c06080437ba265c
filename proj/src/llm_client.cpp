#include "hunklabel/llm_client.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <thread>

#include "hunklabel/errors.hpp"
#include "text_util.hpp"

namespace hunklabel {

namespace {

constexpr auto kDumpErrors = nlohmann::json::error_handler_t::replace;

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::string sanitize_once(std::string_view s) {
  auto open = s.find("<json>");
  if (open != std::string_view::npos) {
    auto close = s.rfind("</json>");
    if (close != std::string_view::npos && close > open)
      return std::string(text::trim(s.substr(open + 6, close - open - 6)));
    return std::string(text::trim(s.substr(open + 6)));
  }
  if (auto close = s.find("</json>"); close != std::string_view::npos)
    return std::string(text::trim(s.substr(0, close)));

  std::string_view t = text::trim(s);
  if (t.starts_with("```")) {
    t.remove_prefix(3);
    auto nl = t.find('\n');
    if (nl != std::string_view::npos && std::all_of(t.begin(), t.begin() + nl, is_ident_char)) {
      t.remove_prefix(nl + 1);
    } else {
      while (!t.empty() && is_ident_char(t.front())) t.remove_prefix(1);
    }
    t = text::trim(t);
    if (t.ends_with("```")) t.remove_suffix(3);
    return std::string(text::trim(t));
  }
  if (t.ends_with("```")) {
    t.remove_suffix(3);
    return std::string(text::trim(t));
  }
  return std::string(t);
}

// Fixes the slips models copy from the prompt's own examples: bare integer
// keys, a doubled opening quote on a key, and trailing commas.
std::string repair_json(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 16);
  bool in_string = false;
  auto last_significant = [&out]() -> char {
    for (auto it = out.rbegin(); it != out.rend(); ++it)
      if (!text::is_space(*it)) return *it;
    return '\0';
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < s.size()) {
        out.push_back(s[++i]);
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      if (i + 2 < s.size() && s[i + 1] == '"' && is_ident_char(s[i + 2])) continue;
      in_string = true;
      out.push_back(c);
      continue;
    }
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < s.size() && text::is_space(s[j])) ++j;
      if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
      out.push_back(c);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
      char prev = last_significant();
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])) != 0) ++j;
      std::size_t k = j;
      while (k < s.size() && text::is_space(s[k])) ++k;
      if ((prev == '{' || prev == ',') && k < s.size() && s[k] == ':') {
        out.push_back('"');
        out.append(s.substr(i, j - i));
        out.push_back('"');
        i = j - 1;
        continue;
      }
    }
    out.push_back(c);
  }
  return out;
}

nlohmann::json parse_payload(std::string_view raw) {
  std::string payload;
  try {
    payload = sanitize(raw);
  } catch (const NoPayload&) {
    throw SchemaError("reply is empty");
  }
  auto try_parse = [](std::string_view s) -> std::optional<nlohmann::json> {
    auto j = nlohmann::json::parse(s, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
  };
  if (auto j = try_parse(payload)) return *j;
  std::string repaired = repair_json(payload);
  if (auto j = try_parse(repaired)) return *j;
  auto first = repaired.find('{');
  auto last = repaired.rfind('}');
  if (first != std::string::npos && last != std::string::npos && last > first)
    if (auto j = try_parse(std::string_view(repaired).substr(first, last - first + 1))) return *j;
  throw SchemaError("reply is not valid JSON");
}

std::string value_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump(-1, ' ', false, kDumpErrors);
}

std::optional<std::uint64_t> parse_key(std::string_view key) {
  key = text::trim(key);
  if (key.empty() || key.size() > 18) return std::nullopt;
  std::uint64_t v = 0;
  for (char c : key) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

bool all_integer_keys(const nlohmann::json& j) {
  if (!j.is_object() || j.empty()) return false;
  for (const auto& [k, _] : j.items())
    if (!parse_key(k)) return false;
  return true;
}

// A JSON array, or the string form "[a, b]" the schema text itself shows.
std::optional<std::vector<nlohmann::json>> read_list(const nlohmann::json& v) {
  if (v.is_null()) return std::vector<nlohmann::json>{};
  if (v.is_array()) return std::vector<nlohmann::json>(v.begin(), v.end());
  if (!v.is_string()) return std::nullopt;
  std::string_view s = text::trim(v.get_ref<const std::string&>());
  if (s.starts_with('[')) s.remove_prefix(1);
  if (s.ends_with(']')) s.remove_suffix(1);
  std::vector<nlohmann::json> out;
  if (text::is_blank(s)) return out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    std::string_view item = s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos);
    item = text::trim(item);
    if (item.size() >= 2 && (item.front() == '"' || item.front() == '\'') &&
        item.back() == item.front())
      item = item.substr(1, item.size() - 2);
    out.emplace_back(std::string(item));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

void warn(std::vector<ReplyWarning>& ws, ReplyWarningKind k, std::string key, std::string msg) {
  ws.push_back({k, std::move(key), std::move(msg)});
}

std::optional<LabelerEntry> read_labeler_entry(const nlohmann::json& e, const std::string& key,
                                               std::vector<ReplyWarning>& ws) {
  if (!e.is_object()) {
    warn(ws, ReplyWarningKind::BadEntry, key, "entry for hunk " + key + " is not an object");
    return std::nullopt;
  }
  if (!e.contains("label_names")) {
    warn(ws, ReplyWarningKind::BadEntry, key, "entry for hunk " + key + " has no label_names");
    return std::nullopt;
  }
  auto names = read_list(e.at("label_names"));
  if (!names) {
    warn(ws, ReplyWarningKind::BadEntry, key, "label_names of hunk " + key + " is not a list");
    return std::nullopt;
  }
  LabelerEntry entry;
  if (e.contains("reasoning")) entry.reasoning = value_text(e.at("reasoning"));
  for (const auto& n : *names) {
    std::optional<LabelType> t;
    if (n.is_string()) t = label_type_from_name(n.get_ref<const std::string&>());
    if (!t) {
      warn(ws, ReplyWarningKind::UnknownLabel, key,
           "hunk " + key + ": unknown label '" + value_text(n) + "' dropped");
      continue;
    }
    if (std::find(entry.labels.begin(), entry.labels.end(), *t) == entry.labels.end())
      entry.labels.push_back(*t);
  }
  return entry;
}

std::optional<std::uint64_t> read_parent(const nlohmann::json& v) {
  if (v.is_null()) return 0;
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    auto n = v.get<std::int64_t>();
    if (n < 0) return std::nullopt;
    return static_cast<std::uint64_t>(n);
  }
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (d < 0 || d != std::floor(d) || d > 1e18) return std::nullopt;
    return static_cast<std::uint64_t>(d);
  }
  if (v.is_string()) {
    std::string_view s = text::trim(v.get_ref<const std::string&>());
    if (s.empty()) return 0;
    return parse_key(s);
  }
  return std::nullopt;
}

std::optional<RefinerEntry> read_refiner_entry(const nlohmann::json& e, const std::string& key,
                                               const StreamLabel& label,
                                               std::vector<ReplyWarning>& ws) {
  auto bad = [&](const std::string& why) {
    warn(ws, ReplyWarningKind::BadEntry, key, "entry for label " + key + ": " + why);
    return std::nullopt;
  };
  if (!e.is_object()) return bad("not an object");

  RefinerEntry entry;
  if (e.contains("reasoning")) entry.reasoning = value_text(e.at("reasoning"));

  if (e.contains("updated_type") && !e.at("updated_type").is_null()) {
    const auto& ut = e.at("updated_type");
    if (!ut.is_string()) return bad("updated_type is not a string");
    std::string_view name = text::trim(ut.get_ref<const std::string&>());
    if (name.empty() || text::to_upper(name) == "NONE") {
      entry.clears_type = true;
    } else if (auto t = label_type_from_name(name)) {
      entry.updated_type = *t;
    } else {
      return bad("unknown updated_type '" + std::string(name) + "'");
    }
  }

  if (e.contains("attributes")) {
    auto items = read_list(e.at("attributes"));
    if (!items) return bad("attributes is not a list");
    for (const auto& a : *items) {
      if (a.is_object() || a.is_array()) return bad("attributes must be scalars");
      entry.attributes.emplace_back(text::trim(value_text(a)));
    }
  }

  if (e.contains("parent_id")) {
    auto p = read_parent(e.at("parent_id"));
    if (!p) return bad("parent_id is not a non-negative integer");
    entry.parent_id = *p;
  }

  std::optional<LabelType> effective = entry.updated_type;
  if (!effective && !entry.clears_type) effective = label.type;
  const bool triples = effective && info(*effective).needs_attributes;
  const std::size_t n = entry.attributes.size();
  if (triples && n % 3 != 0) {
    if (n < 3) return bad(std::to_string(n) + " attributes, expected a multiple of 3");
    warn(ws, ReplyWarningKind::AttributesTruncated, key,
         "label " + key + ": " + std::to_string(n) + " attributes truncated to " +
             std::to_string(n - n % 3));
    entry.attributes.resize(n - n % 3);
  } else if (!triples && n > 0) {
    warn(ws, ReplyWarningKind::AttributesDropped, key,
         "label " + key + ": attributes ignored for this label type");
    entry.attributes.clear();
  }
  return entry;
}

}  // namespace

LlmResponse complete(Backend& backend, const PromptRequest& prompt) {
  if (prompt.text.empty()) throw EmptyInput("prompt is empty");
  BackendReply reply = backend.send(prompt);
  LlmResponse out;
  out.raw_text = std::move(reply.text);
  if (reply.usage) {
    out.usage = *reply.usage;
    out.usage.estimated = false;
  } else {
    out.usage = {estimate_tokens(prompt.text), estimate_tokens(out.raw_text), true};
  }
  try {
    auto j = nlohmann::json::parse(sanitize(out.raw_text), nullptr, false);
    if (!j.is_discarded()) out.parsed = std::move(j);
  } catch (const NoPayload&) {
  }
  return out;
}

std::chrono::milliseconds RetryPolicy::delay_for(unsigned attempt) const {
  double ms = static_cast<double>(initial_delay.count()) *
              std::pow(backoff_factor, attempt > 0 ? attempt - 1 : 0);
  ms = std::min(ms, static_cast<double>(max_delay.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

RetryingBackend::RetryingBackend(std::shared_ptr<Backend> inner, RetryPolicy policy, Sleeper sleep)
    : inner_(std::move(inner)), policy_(policy), sleep_(std::move(sleep)) {
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

BackendReply RetryingBackend::send(const PromptRequest& prompt) {
  for (unsigned attempt = 0;; ++attempt) {
    try {
      return inner_->send(prompt);
    } catch (const TransportError&) {
      if (attempt >= policy_.max_retries) throw;
    } catch (const TimeoutError&) {
      if (attempt >= policy_.max_retries) throw;
    }
    sleep_(policy_.delay_for(attempt + 1));
  }
}

void BackendConfig::validate() const {
  if (!endpoint.starts_with("http://") && !endpoint.starts_with("https://"))
    throw ConfigError("backend endpoint must be an http(s) URL, got '" + endpoint + "'");
  if (!(timeout_seconds > 0)) throw ConfigError("backend timeout must be positive");
  if (!std::isfinite(temperature) || temperature < 0)
    throw ConfigError("temperature must be a non-negative number");
  if (!extra_body.is_object()) throw ConfigError("extra_body must be a JSON object");
}

BackendConfig BackendConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("backend config must be a JSON object");
  BackendConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "endpoint") c.endpoint = v.get<std::string>();
      else if (key == "path") c.path = v.get<std::string>();
      else if (key == "model") c.model = v.get<std::string>();
      else if (key == "token_env") c.token_env = v.get<std::string>();
      else if (key == "timeout_seconds") c.timeout_seconds = v.get<double>();
      else if (key == "max_retries") {
        auto n = v.get<std::int64_t>();
        if (n < 0) throw ConfigError("max_retries must be >= 0");
        c.max_retries = static_cast<unsigned>(n);
      } else if (key == "temperature") c.temperature = v.get<double>();
      else if (key == "max_tokens") c.max_tokens = v.get<int>();
      else if (key == "extra_body") c.extra_body = v;
      else throw ConfigError("unknown backend config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("backend config: ") + e.what());
  }
  return c;
}

std::shared_ptr<Backend> make_http_backend(const BackendConfig& config, Sleeper sleep) {
  config.validate();
  auto http = std::make_shared<HttpBackend>(config);
  RetryPolicy policy;
  policy.max_retries = config.max_retries;
  return std::make_shared<RetryingBackend>(std::move(http), policy, std::move(sleep));
}

LlmResponse complete(const BackendConfig& config, const PromptRequest& prompt) {
  auto backend = make_http_backend(config);
  return complete(*backend, prompt);
}

std::string sanitize(std::string_view raw) {
  std::string current(raw);
  for (;;) {
    std::string next = sanitize_once(current);
    if (next == current) break;
    current = std::move(next);
  }
  if (current.empty()) throw NoPayload("reply carries no payload");
  return current;
}

std::string_view to_string(ReplyWarningKind k) {
  switch (k) {
    case ReplyWarningKind::MissingEntry: return "MissingEntry";
    case ReplyWarningKind::UnexpectedEntry: return "UnexpectedEntry";
    case ReplyWarningKind::UnknownLabel: return "UnknownLabel";
    case ReplyWarningKind::BadEntry: return "BadEntry";
    case ReplyWarningKind::AttributesTruncated: return "AttributesTruncated";
    case ReplyWarningKind::AttributesDropped: return "AttributesDropped";
  }
  return "";
}

LabelerReply parse_labeler_reply(std::string_view raw, LabelerMode mode,
                                 std::span<const std::uint32_t> expected_hunks) {
  nlohmann::json j = parse_payload(raw);
  if (!j.is_object()) throw SchemaError("reply is not a JSON object");

  LabelerReply out;
  const std::set<std::uint32_t> expected(expected_hunks.begin(), expected_hunks.end());
  const nlohmann::json* dict = nullptr;

  if (j.contains("response_dict")) {
    if (!j.at("response_dict").is_object()) throw SchemaError("response_dict is not an object");
    dict = &j.at("response_dict");
  } else if (j.contains("label_names")) {
    if (expected.size() != 1)
      throw SchemaError("single-hunk reply to a " + std::string(to_string(mode)) +
                        " stream of " + std::to_string(expected.size()) + " hunks");
    const std::uint32_t h = *expected.begin();
    if (auto e = read_labeler_entry(j, std::to_string(h), out.warnings))
      out.entries.emplace(h, std::move(*e));
  } else if (all_integer_keys(j)) {
    dict = &j;
  } else {
    throw SchemaError(mode == LabelerMode::Hunk ? "reply lacks label_names"
                                                : "reply lacks response_dict");
  }

  if (dict) {
    for (const auto& [key, value] : dict->items()) {
      auto idx = parse_key(key);
      if (!idx || *idx > UINT32_MAX || !expected.contains(static_cast<std::uint32_t>(*idx))) {
        warn(out.warnings, ReplyWarningKind::UnexpectedEntry, key,
             "entry '" + key + "' is not a hunk of this stream");
        continue;
      }
      auto h = static_cast<std::uint32_t>(*idx);
      if (out.entries.contains(h)) continue;
      if (auto e = read_labeler_entry(value, key, out.warnings))
        out.entries.emplace(h, std::move(*e));
    }
  }

  for (auto h : expected) {
    if (out.entries.contains(h)) continue;
    warn(out.warnings, ReplyWarningKind::MissingEntry, std::to_string(h),
         "no usable entry for hunk " + std::to_string(h) + "; left unlabeled");
    out.entries.emplace(h, LabelerEntry{});
  }
  return out;
}

RefinerReply parse_refiner_reply(std::string_view raw, std::span<const StreamLabel> expected) {
  nlohmann::json j = parse_payload(raw);
  if (!j.is_object()) throw SchemaError("reply is not a JSON object");
  const nlohmann::json* dict = nullptr;
  if (j.contains("response_dict")) {
    if (!j.at("response_dict").is_object()) throw SchemaError("response_dict is not an object");
    dict = &j.at("response_dict");
  } else if (all_integer_keys(j)) {
    dict = &j;
  } else {
    throw SchemaError("reply lacks response_dict");
  }

  std::map<std::uint64_t, const StreamLabel*> by_id;
  for (const auto& l : expected) by_id.emplace(l.id, &l);

  RefinerReply out;
  for (const auto& [key, value] : dict->items()) {
    auto id = parse_key(key);
    auto it = id ? by_id.find(*id) : by_id.end();
    if (it == by_id.end()) {
      warn(out.warnings, ReplyWarningKind::UnexpectedEntry, key,
           "entry '" + key + "' is not a label of this stream");
      continue;
    }
    if (out.entries.contains(*id)) continue;
    if (auto e = read_refiner_entry(value, key, *it->second, out.warnings))
      out.entries.emplace(*id, std::move(*e));
  }

  for (const auto& [id, label] : by_id) {
    if (out.entries.contains(id)) continue;
    warn(out.warnings, ReplyWarningKind::MissingEntry, std::to_string(id),
         "no usable entry for label " + std::to_string(id) + "; type kept, no parent");
    RefinerEntry d;
    d.defaulted = true;
    out.entries.emplace(id, std::move(d));
  }
  return out;
}

}  // namespace hunklabel
