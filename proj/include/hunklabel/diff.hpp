#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hunklabel {

inline constexpr std::size_t kDefaultContextWidth = 5;
inline constexpr std::string_view kDevNull = "/dev/null";

enum class LineKind { Context, Added, Removed };

struct HunkLine {
  LineKind kind = LineKind::Context;
  std::string text;  // without the marker; tabs, trailing blanks and '\r' kept
  // Verbatim "\ No newline at end of file" note following this line, if any.
  std::string eol_note;

  bool operator==(const HunkLine&) const = default;
};

struct HunkHeader {
  std::uint32_t old_start = 0;
  std::uint32_t old_len = 0;
  std::uint32_t new_start = 0;
  std::uint32_t new_len = 0;
  std::string scope;  // trailing text after the closing "@@", trimmed

  bool operator==(const HunkHeader&) const = default;
};

struct DiffHunk {
  std::uint32_t global_index = 0;  // 1-based across the whole patch
  HunkHeader header;
  std::string header_line;  // the "@@ ... @@ scope" line as it appeared
  std::vector<HunkLine> lines;
  std::vector<std::string> context_before;
  std::vector<std::string> context_after;
};

struct FileDiff {
  std::string old_path;
  std::string new_path;
  std::vector<DiffHunk> hunks;

  // new_path, or old_path for a deleted file.
  const std::string& path() const;
};

struct FileVersions {
  std::string old_text;
  std::string new_text;
};

using FileContents = std::map<std::string, FileVersions>;

struct PatchBundle {
  std::vector<FileDiff> files;
  std::optional<std::string> source_meta;
  std::optional<FileContents> file_contents;

  std::size_t hunk_count() const;
  // Throws UnknownHunk when the index is outside 1..hunk_count().
  const DiffHunk& hunk(std::uint32_t global_index) const;
  const FileDiff& file_of(std::uint32_t global_index) const;
  std::vector<const DiffHunk*> all_hunks() const;
};

// Parses `git diff` style unified diff text. Files whose section carries no
// hunks (pure renames, mode changes, binary notes) are skipped. Throws
// MalformedDiff naming the first offending line.
PatchBundle parse_patch(std::string_view diff_text,
                        std::optional<FileContents> file_contents = std::nullopt);

struct HunkContext {
  std::vector<std::string> before;
  std::vector<std::string> after;
};

// Up to `width` non-blank lines around the hunk. Reads the new file version
// from bundle.file_contents when present (old version for deleted files);
// otherwise uses the hunk's own leading/trailing diff context lines.
HunkContext extract_context(const DiffHunk& hunk, const PatchBundle& bundle,
                            std::size_t width = kDefaultContextWidth);

// Fills context_before/context_after of every hunk in place.
void attach_contexts(PatchBundle& bundle, std::size_t width = kDefaultContextWidth);

// Hunk body with ' ', '+', '-' markers, one '\n'-terminated line each.
std::string render_hunk_text(const DiffHunk& hunk);

}  // namespace hunklabel
