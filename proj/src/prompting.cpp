#include "hunklabel/prompting.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hunklabel/errors.hpp"
#include "text_util.hpp"

#ifndef HUNKLABEL_DEFAULT_PROMPT_DIR
#define HUNKLABEL_DEFAULT_PROMPT_DIR "resources/prompts"
#endif

namespace hunklabel {

std::string_view to_string(LabelerMode m) {
  switch (m) {
    case LabelerMode::Hunk: return "hunk";
    case LabelerMode::File: return "file";
    case LabelerMode::Patch: return "patch";
  }
  return "";
}

std::optional<LabelerMode> labeler_mode_from_name(std::string_view name) {
  const std::string n = text::to_lower(text::trim(name));
  if (n == "hunk") return LabelerMode::Hunk;
  if (n == "file") return LabelerMode::File;
  if (n == "patch") return LabelerMode::Patch;
  return std::nullopt;
}

std::string_view to_string(TemplateKind k) {
  switch (k) {
    case TemplateKind::LabelerHunk: return "LABELER_HUNK";
    case TemplateKind::LabelerFile: return "LABELER_FILE";
    case TemplateKind::LabelerPatch: return "LABELER_PATCH";
    case TemplateKind::Refiner: return "REFINER";
  }
  return "";
}

namespace {

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

std::string read_resource(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TemplateError("cannot read prompt resource " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  if (s.ends_with('\n')) s.pop_back();
  return s;
}

void append_lines(std::vector<std::string>& out, const std::vector<std::string>& lines) {
  out.insert(out.end(), lines.begin(), lines.end());
}

void append_body(std::vector<std::string>& out, const DiffHunk& hunk) {
  const std::string body = render_hunk_text(hunk);
  for (auto line : text::split_lines(body)) out.emplace_back(line);
}

// "```", before, body, after, "```"
void append_fenced_hunk(std::vector<std::string>& out, const StreamHunk& h) {
  out.emplace_back("```");
  append_lines(out, h.context.before);
  append_body(out, *h.hunk);
  append_lines(out, h.context.after);
  out.emplace_back("```");
}

}  // namespace

const std::set<std::string>& PromptTemplate::required_placeholders(TemplateKind kind) {
  static const std::set<std::string> hunk{"label_types",          "specific_instructions",
                                          "examples",             "hunk_format_instructions",
                                          "json_format_request",  "input_stream"};
  static const std::set<std::string> stream{"label_types",         "specific_instructions",
                                            "examples",            "stream_format_instructions",
                                            "json_format_request", "input_stream"};
  static const std::set<std::string> refiner{
      "label_types", "parent_and_attributes_instructions", "refiner_stream_format_instructions",
      "json_format_request", "input_stream"};
  switch (kind) {
    case TemplateKind::LabelerHunk: return hunk;
    case TemplateKind::LabelerFile:
    case TemplateKind::LabelerPatch: return stream;
    case TemplateKind::Refiner: return refiner;
  }
  return hunk;
}

PromptTemplate PromptTemplate::parse(TemplateKind kind, std::string skeleton) {
  PromptTemplate t;
  t.kind_ = kind;
  std::string literal;
  std::size_t i = 0;
  while (i < skeleton.size()) {
    if (skeleton[i] == '{') {
      std::size_t j = i + 1;
      while (j < skeleton.size() && is_placeholder_char(skeleton[j])) ++j;
      if (j > i + 1 && j < skeleton.size() && skeleton[j] == '}') {
        if (!literal.empty()) t.segments_.push_back({false, std::move(literal)});
        literal.clear();
        std::string name = skeleton.substr(i + 1, j - i - 1);
        t.names_.insert(name);
        t.segments_.push_back({true, std::move(name)});
        i = j + 1;
        continue;
      }
    }
    literal.push_back(skeleton[i++]);
  }
  if (!literal.empty()) t.segments_.push_back({false, std::move(literal)});

  const auto& required = required_placeholders(kind);
  if (t.names_ != required) {
    std::string msg = std::string(to_string(kind)) + " template placeholders differ from {";
    msg += text::join(required, ", ") + "}: got {" + text::join(t.names_, ", ") + "}";
    throw TemplateError(msg);
  }
  return t;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  std::string out;
  for (const auto& seg : segments_) {
    if (!seg.placeholder) {
      out += seg.text;
      continue;
    }
    auto it = values.find(seg.text);
    if (it == values.end()) throw TemplateError("no value for placeholder {" + seg.text + "}");
    out += it->second;
  }
  return out;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  auto res = [&](const char* name) { return read_resource(dir / name); };
  return PromptLibrary{
      PromptTemplate::parse(TemplateKind::LabelerHunk, res("labeler_hunk.txt")),
      PromptTemplate::parse(TemplateKind::LabelerFile, res("labeler_stream.txt")),
      PromptTemplate::parse(TemplateKind::Refiner, res("refiner.txt")),
      res("specific_instructions.txt"),
      res("examples.txt"),
      res("hunk_format_instructions.txt"),
      res("stream_format_instructions.txt"),
      res("json_format_request.txt"),
      res("refiner_stream_format_instructions.txt"),
      res("parent_and_attributes_instructions.txt"),
      {},
  };
}

std::filesystem::path PromptLibrary::default_dir() {
  if (const char* env = std::getenv("HUNKLABEL_PROMPT_DIR"); env && *env) return env;
  return HUNKLABEL_DEFAULT_PROMPT_DIR;
}

PromptLibrary PromptLibrary::load_default() { return load(default_dir()); }

std::string PromptLibrary::examples_text() const {
  std::string out = examples;
  for (const auto& extra : extra_examples) {
    out += "\n\n";
    out += extra;
  }
  return out;
}

std::string render_label_types() {
  std::vector<std::string> lines;
  for (const auto& t : all_label_types()) {
    lines.push_back("label_name: " + std::string(t.snake_name) +
                    ", description: " + std::string(t.description));
  }
  return text::join(lines, "\n");
}

std::string render_hunk_stream(const StreamHunk& h) {
  std::vector<std::string> out;
  out.push_back("In file " + h.file_path + ":");
  out.emplace_back("Code above the diff hunk:");
  out.emplace_back("```");
  append_lines(out, h.context.before);
  out.emplace_back("```");
  out.emplace_back("Diff hunk content:");
  out.push_back("Header " + h.hunk->header_line + ":");
  out.emplace_back("```");
  append_body(out, *h.hunk);
  out.emplace_back("```");
  out.emplace_back("Code below the diff hunk:");
  append_lines(out, h.context.after);
  return text::join(out, "\n");
}

std::string render_file_stream(std::span<const StreamHunk> hunks) {
  std::vector<std::string> out;
  const std::string* current = nullptr;
  for (const auto& h : hunks) {
    if (!current || *current != h.file_path) {
      out.push_back("In file " + h.file_path + ":");
      current = &h.file_path;
    }
    out.push_back("Diff hunk number " + std::to_string(h.hunk->global_index) + ":");
    append_fenced_hunk(out, h);
  }
  return text::join(out, "\n");
}

std::string render_refiner_stream(std::span<const RefinerStreamEntry> entries) {
  std::vector<std::string> out;
  const std::string* current = nullptr;
  for (const auto& e : entries) {
    if (!current || *current != e.hunk.file_path) {
      out.push_back("In file " + e.hunk.file_path + ":");
      current = &e.hunk.file_path;
    }
    out.push_back("Diff hunk number " + std::to_string(e.hunk.hunk->global_index) +
                  " in scope " + e.hunk.hunk->header.scope + ":");
    out.emplace_back("Labeled as:");
    for (const auto& l : e.labels) {
      std::string type = l.type ? std::string(upper_name(*l.type)) : "NONE";
      out.push_back("Type: " + type + ", ID: " + std::to_string(l.id));
    }
    append_fenced_hunk(out, e.hunk);
  }
  return text::join(out, "\n");
}

PromptRequest render_labeler_prompt(const PromptLibrary& lib, LabelerMode mode,
                                    std::span<const StreamHunk> hunks) {
  if (hunks.empty()) throw EmptyInput("labeler prompt needs at least one diff hunk");
  for (const auto& h : hunks)
    if (!h.hunk) throw std::invalid_argument("stream entry without a hunk");

  PromptRequest req;
  for (const auto& h : hunks) req.covered_hunks.push_back(h.hunk->global_index);

  std::map<std::string, std::string> values{
      {"label_types", render_label_types()},
      {"specific_instructions", lib.specific_instructions},
      {"examples", lib.examples_text()},
      {"json_format_request", lib.json_format_request},
  };

  switch (mode) {
    case LabelerMode::Hunk:
      if (hunks.size() != 1)
        throw std::invalid_argument("per-hunk prompts cover exactly one diff hunk");
      req.kind = TemplateKind::LabelerHunk;
      values["hunk_format_instructions"] = lib.hunk_format_instructions;
      values["input_stream"] = render_hunk_stream(hunks.front());
      req.text = lib.labeler_hunk.render(values);
      return req;
    case LabelerMode::File:
      for (const auto& h : hunks)
        if (h.file_path != hunks.front().file_path)
          throw std::invalid_argument("per-file prompts cover hunks of a single file");
      req.kind = TemplateKind::LabelerFile;
      break;
    case LabelerMode::Patch:
      req.kind = TemplateKind::LabelerPatch;
      break;
  }
  values["stream_format_instructions"] = lib.stream_format_instructions;
  values["input_stream"] = render_file_stream(hunks);
  req.text = lib.labeler_stream.render(values);
  return req;
}

PromptRequest render_refiner_prompt(const PromptLibrary& lib,
                                    std::span<const RefinerStreamEntry> entries) {
  PromptRequest req;
  req.kind = TemplateKind::Refiner;
  for (const auto& e : entries) {
    if (!e.hunk.hunk) throw std::invalid_argument("stream entry without a hunk");
    if (e.labels.empty()) continue;
    req.covered_hunks.push_back(e.hunk.hunk->global_index);
    req.covered_labels.insert(req.covered_labels.end(), e.labels.begin(), e.labels.end());
  }
  if (req.covered_labels.empty()) throw EmptyInput("no labels to refine");

  std::vector<RefinerStreamEntry> nonempty;
  for (const auto& e : entries)
    if (!e.labels.empty()) nonempty.push_back(e);

  req.text = lib.refiner.render({
      {"label_types", render_label_types()},
      {"parent_and_attributes_instructions", lib.parent_and_attributes_instructions},
      {"refiner_stream_format_instructions", lib.refiner_stream_format_instructions},
      {"json_format_request", lib.json_format_request},
      {"input_stream", render_refiner_stream(nonempty)},
  });
  return req;
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

}  // namespace hunklabel
