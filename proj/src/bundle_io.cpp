#include "hunklabel/bundle_io.hpp"

#include <fstream>
#include <sstream>

#include "hunklabel/errors.hpp"
#include "hunklabel/labeling_json.hpp"

namespace fs = std::filesystem;

namespace hunklabel {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

std::optional<FileContents> load_file_contents(const PatchBundle& bundle, const fs::path& files_dir) {
  FileContents contents;
  auto read_if = [](const fs::path& p, std::string& into) {
    if (!fs::is_regular_file(p)) return false;
    into = read_text_file(p);
    return true;
  };
  for (const auto& file : bundle.files) {
    FileVersions v;
    bool any = false;
    if (file.old_path != kDevNull) any |= read_if(files_dir / "old" / file.old_path, v.old_text);
    if (file.new_path != kDevNull) any |= read_if(files_dir / "new" / file.new_path, v.new_text);
    if (any) contents.emplace(file.path(), std::move(v));
  }
  if (contents.empty()) return std::nullopt;
  return contents;
}

PatchBundle load_patch(const fs::path& diff_path, const std::optional<fs::path>& files_dir) {
  const std::string text = read_text_file(diff_path);
  PatchBundle bundle = parse_patch(text);
  if (files_dir) {
    if (!fs::is_directory(*files_dir))
      throw ConfigError("file contents directory " + files_dir->string() + " does not exist");
    if (auto contents = load_file_contents(bundle, *files_dir))
      bundle = parse_patch(text, std::move(contents));
  }
  return bundle;
}

BundleOnDisk load_bundle(const fs::path& dir) {
  BundleOnDisk out;
  const fs::path files = dir / "files";
  out.bundle = load_patch(dir / "patch.diff",
                          fs::is_directory(files) ? std::optional<fs::path>(files) : std::nullopt);
  if (fs::is_regular_file(dir / "meta.json")) out.bundle.source_meta = read_text_file(dir / "meta.json");
  if (fs::is_regular_file(dir / "ground_truth.json"))
    out.ground_truth = load_labeling(dir / "ground_truth.json", out.bundle.hunk_count());
  return out;
}

}  // namespace hunklabel
