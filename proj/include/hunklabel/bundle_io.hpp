#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "hunklabel/diff.hpp"
#include "hunklabel/taxonomy.hpp"

namespace hunklabel {

// On-disk patch bundle:
//   <dir>/patch.diff
//   <dir>/files/old/<old path>   optional pre-change file contents
//   <dir>/files/new/<new path>   optional post-change file contents
//   <dir>/ground_truth.json      optional LabelingSet
//   <dir>/meta.json              optional, kept verbatim as source_meta
struct BundleOnDisk {
  PatchBundle bundle;
  std::optional<LabelingSet> ground_truth;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Reads files/old and files/new below `files_dir` for the paths the patch
// touches; returns nullopt when none exist.
std::optional<FileContents> load_file_contents(const PatchBundle& bundle,
                                               const std::filesystem::path& files_dir);

// Parses the diff and, when `files_dir` is given, loads its file contents.
PatchBundle load_patch(const std::filesystem::path& diff_path,
                       const std::optional<std::filesystem::path>& files_dir = std::nullopt);

BundleOnDisk load_bundle(const std::filesystem::path& dir);

}  // namespace hunklabel
