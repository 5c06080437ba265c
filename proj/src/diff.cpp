#include "hunklabel/diff.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "hunklabel/errors.hpp"
#include "text_util.hpp"

namespace hunklabel {

const std::string& FileDiff::path() const {
  return new_path == kDevNull ? old_path : new_path;
}

std::size_t PatchBundle::hunk_count() const {
  std::size_t n = 0;
  for (const auto& f : files) n += f.hunks.size();
  return n;
}

const DiffHunk& PatchBundle::hunk(std::uint32_t global_index) const {
  for (const auto& f : files)
    for (const auto& h : f.hunks)
      if (h.global_index == global_index) return h;
  throw UnknownHunk("no hunk with index " + std::to_string(global_index));
}

const FileDiff& PatchBundle::file_of(std::uint32_t global_index) const {
  for (const auto& f : files)
    for (const auto& h : f.hunks)
      if (h.global_index == global_index) return f;
  throw UnknownHunk("no hunk with index " + std::to_string(global_index));
}

std::vector<const DiffHunk*> PatchBundle::all_hunks() const {
  std::vector<const DiffHunk*> out;
  for (const auto& f : files)
    for (const auto& h : f.hunks) out.push_back(&h);
  return out;
}

namespace {

bool parse_number(std::string_view s, std::uint32_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// "-12,3" / "+4" (sign already stripped by caller).
bool parse_range(std::string_view s, std::uint32_t& start, std::uint32_t& len) {
  auto comma = s.find(',');
  if (comma == std::string_view::npos) {
    len = 1;
    return parse_number(s, start);
  }
  return parse_number(s.substr(0, comma), start) &&
         parse_number(s.substr(comma + 1), len);
}

std::optional<HunkHeader> parse_hunk_header(std::string_view line) {
  if (!line.starts_with("@@ -")) return std::nullopt;
  std::string_view rest = line.substr(4);
  auto sp = rest.find(' ');
  if (sp == std::string_view::npos) return std::nullopt;
  HunkHeader h;
  if (!parse_range(rest.substr(0, sp), h.old_start, h.old_len)) return std::nullopt;
  rest = rest.substr(sp + 1);
  if (!rest.starts_with('+')) return std::nullopt;
  rest = rest.substr(1);
  sp = rest.find(' ');
  if (sp == std::string_view::npos) return std::nullopt;
  if (!parse_range(rest.substr(0, sp), h.new_start, h.new_len)) return std::nullopt;
  rest = rest.substr(sp + 1);
  if (!rest.starts_with("@@")) return std::nullopt;
  h.scope = std::string(text::trim(rest.substr(2)));
  return h;
}

std::string parse_path(std::string_view s) {
  if (!s.empty() && s.front() == '"') {
    std::string out;
    for (std::size_t i = 1; i < s.size(); ++i) {
      char c = s[i];
      if (c == '"') break;
      if (c == '\\' && i + 1 < s.size()) {
        char n = s[++i];
        out.push_back(n == 't' ? '\t' : n == 'n' ? '\n' : n);
      } else {
        out.push_back(c);
      }
    }
    if (out.starts_with("a/") || out.starts_with("b/")) out.erase(0, 2);
    return out;
  }
  auto tab = s.find('\t');
  if (tab != std::string_view::npos) s = s.substr(0, tab);
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  if (s == kDevNull) return std::string(s);
  if (s.starts_with("a/") || s.starts_with("b/")) s.remove_prefix(2);
  return std::string(s);
}

class PatchParser {
 public:
  explicit PatchParser(std::string_view text) : lines_(text::split_lines(text)) {}

  std::vector<FileDiff> run() {
    std::size_t i = 0;
    while (i < lines_.size()) {
      std::string_view line = lines_[i];
      const std::size_t lineno = i + 1;

      if (after_hunk_) {
        after_hunk_ = false;
        if (line.starts_with('\\')) {
          current_->hunks.back().lines.back().eol_note = std::string(line);
          ++i;
          continue;
        }
        bool overflow = line.starts_with('+') || line.starts_with(' ');
        if (line.starts_with('-')) {
          bool file_header = line.starts_with("--- ") && i + 1 < lines_.size() &&
                             lines_[i + 1].starts_with("+++ ");
          bool signature = line == "-- " || line == "--";
          overflow = !file_header && !signature;
        }
        if (overflow)
          throw MalformedDiff(lineno, "hunk body exceeds the line counts of its header");
      }

      if (line.starts_with("diff --git ")) {
        finish_file();
        ++i;
        continue;
      }
      if (line.starts_with("--- ") && i + 1 < lines_.size() &&
          lines_[i + 1].starts_with("+++ ")) {
        finish_file();
        current_.emplace();
        current_->old_path = parse_path(line.substr(4));
        current_->new_path = parse_path(lines_[i + 1].substr(4));
        file_line_ = i + 2;
        i += 2;
        continue;
      }
      if (line.starts_with("@@")) {
        i = parse_hunk(i);
        continue;
      }
      ++i;
    }
    finish_file();
    if (files_.empty()) throw MalformedDiff(0, "no diff hunks found");
    return std::move(files_);
  }

 private:
  std::size_t parse_hunk(std::size_t i) {
    const std::size_t lineno = i + 1;
    if (!current_) throw MalformedDiff(lineno, "hunk header before any ---/+++ file header");
    auto header = parse_hunk_header(lines_[i]);
    if (!header) throw MalformedDiff(lineno, "unparseable hunk header");
    if (header->old_len == 0 && header->new_len == 0)
      throw MalformedDiff(lineno, "hunk header declares an empty hunk");
    if (!current_->hunks.empty()) {
      const HunkHeader& prev = current_->hunks.back().header;
      if (header->new_start < prev.new_start + prev.new_len ||
          header->old_start < prev.old_start + prev.old_len)
        throw MalformedDiff(lineno, "hunk overlaps or precedes the previous hunk");
    }

    DiffHunk hunk;
    hunk.header = *header;
    hunk.header_line = std::string(lines_[i]);
    std::uint32_t old_left = header->old_len;
    std::uint32_t new_left = header->new_len;
    ++i;
    while (old_left > 0 || new_left > 0) {
      if (i >= lines_.size())
        throw MalformedDiff(lines_.size(), "unexpected end of input inside hunk");
      std::string_view line = lines_[i];
      const std::size_t at = i + 1;
      char marker = line.empty() ? ' ' : line.front();
      std::string_view body = line.empty() ? line : line.substr(1);
      switch (marker) {
        case ' ':
          if (old_left == 0 || new_left == 0)
            throw MalformedDiff(at, "context line exceeds the line counts of its header");
          --old_left;
          --new_left;
          hunk.lines.push_back({LineKind::Context, std::string(body), {}});
          break;
        case '-':
          if (old_left == 0)
            throw MalformedDiff(at, "removed line exceeds the old line count of its header");
          --old_left;
          hunk.lines.push_back({LineKind::Removed, std::string(body), {}});
          break;
        case '+':
          if (new_left == 0)
            throw MalformedDiff(at, "added line exceeds the new line count of its header");
          --new_left;
          hunk.lines.push_back({LineKind::Added, std::string(body), {}});
          break;
        case '\\':
          if (hunk.lines.empty()) throw MalformedDiff(at, "no-newline marker without a line");
          hunk.lines.back().eol_note = std::string(line);
          break;
        default:
          throw MalformedDiff(at, "hunk ends early: " + std::to_string(old_left) +
                                      " old and " + std::to_string(new_left) +
                                      " new lines missing");
      }
      ++i;
    }
    current_->hunks.push_back(std::move(hunk));
    after_hunk_ = true;
    return i;
  }

  void finish_file() {
    if (!current_) return;
    if (!current_->hunks.empty()) {
      if (!paths_.insert(current_->path()).second)
        throw MalformedDiff(file_line_, "file '" + current_->path() + "' appears twice");
      for (auto& h : current_->hunks) h.global_index = ++next_index_;
      files_.push_back(std::move(*current_));
    }
    current_.reset();
  }

  std::vector<std::string_view> lines_;
  std::vector<FileDiff> files_;
  std::optional<FileDiff> current_;
  std::set<std::string> paths_;
  std::size_t file_line_ = 0;
  std::uint32_t next_index_ = 0;
  bool after_hunk_ = false;
};

std::vector<std::string> nearest_nonblank_before(const std::vector<std::string_view>& lines,
                                                 std::size_t end, std::size_t width) {
  // lines[0, end) are candidates, nearest first.
  std::vector<std::string> out;
  for (std::size_t k = end; k > 0 && out.size() < width; --k)
    if (!text::is_blank(lines[k - 1])) out.emplace_back(lines[k - 1]);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::string> nearest_nonblank_after(const std::vector<std::string_view>& lines,
                                                std::size_t begin, std::size_t width) {
  std::vector<std::string> out;
  for (std::size_t k = begin; k < lines.size() && out.size() < width; ++k)
    if (!text::is_blank(lines[k])) out.emplace_back(lines[k]);
  return out;
}

}  // namespace

PatchBundle parse_patch(std::string_view diff_text, std::optional<FileContents> file_contents) {
  PatchBundle bundle;
  bundle.files = PatchParser(diff_text).run();
  bundle.file_contents = std::move(file_contents);
  return bundle;
}

HunkContext extract_context(const DiffHunk& hunk, const PatchBundle& bundle, std::size_t width) {
  HunkContext ctx;
  if (width == 0) return ctx;

  if (bundle.file_contents) {
    const FileDiff* file = nullptr;
    for (const auto& f : bundle.files)
      for (const auto& h : f.hunks)
        if (&h == &hunk || h.global_index == hunk.global_index) file = &f;
    if (file) {
      auto it = bundle.file_contents->find(file->path());
      if (it != bundle.file_contents->end()) {
        const bool deleted = file->new_path == kDevNull;
        const std::string& content = deleted ? it->second.old_text : it->second.new_text;
        std::size_t start = deleted ? hunk.header.old_start : hunk.header.new_start;
        std::size_t len = deleted ? hunk.header.old_len : hunk.header.new_len;
        if (len > 0 && start == 0) start = 1;
        if (!content.empty()) {
          auto lines = text::split_lines(content);
          // 1-based [start, start+len) is the hunk; an empty range sits after `start`.
          std::size_t before_end = len == 0 ? start : start - 1;
          std::size_t after_begin = len == 0 ? start : start - 1 + len;
          before_end = std::min(before_end, lines.size());
          ctx.before = nearest_nonblank_before(lines, before_end, width);
          ctx.after = nearest_nonblank_after(lines, after_begin, width);
          return ctx;
        }
      }
    }
  }

  // Fallback: the diff's own context lines around the changed span.
  std::size_t first_change = hunk.lines.size();
  std::size_t last_change = 0;
  for (std::size_t k = 0; k < hunk.lines.size(); ++k) {
    if (hunk.lines[k].kind != LineKind::Context) {
      first_change = std::min(first_change, k);
      last_change = k + 1;
    }
  }
  if (first_change == hunk.lines.size()) return ctx;
  std::vector<std::string_view> view;
  view.reserve(hunk.lines.size());
  for (const auto& l : hunk.lines) view.emplace_back(l.text);
  ctx.before = nearest_nonblank_before(view, first_change, width);
  ctx.after = nearest_nonblank_after(view, last_change, width);
  return ctx;
}

void attach_contexts(PatchBundle& bundle, std::size_t width) {
  for (auto& f : bundle.files) {
    for (auto& h : f.hunks) {
      auto ctx = extract_context(h, bundle, width);
      h.context_before = std::move(ctx.before);
      h.context_after = std::move(ctx.after);
    }
  }
}

std::string render_hunk_text(const DiffHunk& hunk) {
  std::string out;
  for (const auto& line : hunk.lines) {
    switch (line.kind) {
      case LineKind::Context: out.push_back(' '); break;
      case LineKind::Added: out.push_back('+'); break;
      case LineKind::Removed: out.push_back('-'); break;
    }
    out += line.text;
    out.push_back('\n');
    if (!line.eol_note.empty()) {
      out += line.eol_note;
      out.push_back('\n');
    }
  }
  return out;
}

}  // namespace hunklabel
