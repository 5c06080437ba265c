#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "hunklabel/taxonomy.hpp"

namespace hunklabel {

// {"hunk_count": n, "instances": [{id, hunk_index, label_type, parent_id,
// attributes}, ...]} with instances in ascending id and label_type in upper
// case.
nlohmann::json labeling_to_json(const LabelingSet& set);

// Accepts the object form above or a bare instance array. For a bare array
// the hunk count comes from `hunk_count`, else from the largest hunk_index.
// A supplied `hunk_count` must agree with the object form's own count.
// Throws SchemaError.
LabelingSet labeling_from_json(const nlohmann::json& j,
                               std::optional<std::size_t> hunk_count = std::nullopt);

LabelingSet load_labeling(const std::filesystem::path& path,
                          std::optional<std::size_t> hunk_count = std::nullopt);
void save_labeling(const std::filesystem::path& path, const LabelingSet& set);

}  // namespace hunklabel
