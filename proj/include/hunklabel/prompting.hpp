#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hunklabel/diff.hpp"
#include "hunklabel/taxonomy.hpp"

namespace hunklabel {

enum class LabelerMode { Hunk, File, Patch };

std::string_view to_string(LabelerMode m);
std::optional<LabelerMode> labeler_mode_from_name(std::string_view name);

enum class TemplateKind { LabelerHunk, LabelerFile, LabelerPatch, Refiner };

std::string_view to_string(TemplateKind k);

// A prompt skeleton with {name} placeholders. Braces not enclosing a
// lowercase identifier are literal text.
class PromptTemplate {
 public:
  // Throws TemplateError unless the skeleton's placeholder set is exactly
  // the one required for `kind`.
  static PromptTemplate parse(TemplateKind kind, std::string skeleton);

  static const std::set<std::string>& required_placeholders(TemplateKind kind);

  // Single pass: substituted values are not scanned for placeholders.
  // Throws TemplateError when a placeholder has no value.
  std::string render(const std::map<std::string, std::string>& values) const;

  TemplateKind kind() const { return kind_; }
  const std::set<std::string>& placeholders() const { return names_; }

 private:
  struct Segment {
    bool placeholder;
    std::string text;
  };
  TemplateKind kind_ = TemplateKind::LabelerHunk;
  std::vector<Segment> segments_;
  std::set<std::string> names_;
};

// All template and placeholder texts, loaded from a resource directory.
struct PromptLibrary {
  PromptTemplate labeler_hunk;
  PromptTemplate labeler_stream;  // shared by per-file and per-patch modes
  PromptTemplate refiner;
  std::string specific_instructions;
  std::string examples;
  std::string hunk_format_instructions;
  std::string stream_format_instructions;
  std::string json_format_request;
  std::string refiner_stream_format_instructions;
  std::string parent_and_attributes_instructions;
  // Appended to `examples`, separated by blank lines.
  std::vector<std::string> extra_examples;

  static PromptLibrary load(const std::filesystem::path& dir);
  // $HUNKLABEL_PROMPT_DIR if set, otherwise the directory compiled in.
  static PromptLibrary load_default();
  static std::filesystem::path default_dir();

  std::string examples_text() const;
};

// "label_name: <snake>, description: <text>" lines in taxonomy order.
std::string render_label_types();

struct StreamHunk {
  std::string file_path;
  const DiffHunk* hunk = nullptr;
  HunkContext context;
};

// A label as presented to the refiner. An empty type is the NONE pseudo
// label of an unlabeled hunk.
struct StreamLabel {
  std::uint64_t id = 0;
  std::uint32_t hunk_index = 0;
  std::optional<LabelType> type;

  bool operator==(const StreamLabel&) const = default;
};

struct RefinerStreamEntry {
  StreamHunk hunk;
  std::vector<StreamLabel> labels;
};

struct PromptRequest {
  TemplateKind kind = TemplateKind::LabelerHunk;
  std::string text;
  std::vector<std::uint32_t> covered_hunks;
  std::vector<StreamLabel> covered_labels;  // refiner only
};

// Hunk mode takes exactly one hunk; file mode hunks must share a path.
// Throws EmptyInput for an empty list, std::invalid_argument otherwise.
PromptRequest render_labeler_prompt(const PromptLibrary& lib, LabelerMode mode,
                                    std::span<const StreamHunk> hunks);

// Throws EmptyInput when there is nothing to refine.
PromptRequest render_refiner_prompt(const PromptLibrary& lib,
                                    std::span<const RefinerStreamEntry> entries);

// Stream-only renderers, exposed for tests and dry runs.
std::string render_hunk_stream(const StreamHunk& h);
std::string render_file_stream(std::span<const StreamHunk> hunks);
std::string render_refiner_stream(std::span<const RefinerStreamEntry> entries);

// ceil(bytes / 4); fallback when a backend reports no usage.
std::size_t estimate_tokens(std::string_view text);

}  // namespace hunklabel
