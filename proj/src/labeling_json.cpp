#include "hunklabel/labeling_json.hpp"

#include <algorithm>
#include <fstream>

#include "hunklabel/errors.hpp"

namespace hunklabel {

namespace {

std::uint64_t read_id(const nlohmann::json& v, const char* field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return std::stoull(s);
  }
  throw SchemaError(std::string("field '") + field + "' must be a non-negative integer");
}

LabelingInstance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("labeling instance must be an object");
  for (const char* f : {"id", "hunk_index", "label_type"})
    if (!j.contains(f)) throw SchemaError(std::string("labeling instance lacks '") + f + "'");
  LabelingInstance inst;
  inst.id = read_id(j.at("id"), "id");
  auto hunk = read_id(j.at("hunk_index"), "hunk_index");
  if (hunk > UINT32_MAX) throw SchemaError("hunk_index out of range");
  inst.hunk_index = static_cast<std::uint32_t>(hunk);
  if (!j.at("label_type").is_string()) throw SchemaError("label_type must be a string");
  auto t = label_type_from_name(j.at("label_type").get<std::string>());
  if (!t) throw SchemaError("unknown label_type '" + j.at("label_type").get<std::string>() + "'");
  inst.label_type = *t;
  if (j.contains("parent_id") && !j.at("parent_id").is_null())
    inst.parent_id = read_id(j.at("parent_id"), "parent_id");
  if (j.contains("attributes") && !j.at("attributes").is_null()) {
    if (!j.at("attributes").is_array()) throw SchemaError("attributes must be an array");
    for (const auto& a : j.at("attributes")) {
      if (!a.is_string()) throw SchemaError("attributes must be strings");
      inst.attributes.push_back(a.get<std::string>());
    }
  }
  return inst;
}

}  // namespace

nlohmann::json labeling_to_json(const LabelingSet& set) {
  LabelingSet sorted = set;
  sorted.sort_by_id();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& inst : sorted.instances) {
    arr.push_back({{"id", inst.id},
                   {"hunk_index", inst.hunk_index},
                   {"label_type", std::string(upper_name(inst.label_type))},
                   {"parent_id", inst.parent_id},
                   {"attributes", inst.attributes}});
  }
  return {{"hunk_count", set.hunk_count}, {"instances", std::move(arr)}};
}

LabelingSet labeling_from_json(const nlohmann::json& j, std::optional<std::size_t> hunk_count) {
  LabelingSet set;
  const nlohmann::json* arr = &j;
  if (j.is_object()) {
    if (!j.contains("instances") || !j.at("instances").is_array())
      throw SchemaError("labeling object lacks an 'instances' array");
    arr = &j.at("instances");
    if (j.contains("hunk_count")) {
      auto n = read_id(j.at("hunk_count"), "hunk_count");
      if (hunk_count && *hunk_count != n)
        throw DomainMismatch("labeling declares " + std::to_string(n) + " hunks, expected " +
                             std::to_string(*hunk_count));
      set.hunk_count = n;
    }
  } else if (!j.is_array()) {
    throw SchemaError("labeling must be an object or an array");
  }
  for (const auto& item : *arr) set.instances.push_back(instance_from_json(item));
  if (!j.is_object() || !j.contains("hunk_count")) {
    if (hunk_count) {
      set.hunk_count = *hunk_count;
    } else {
      for (const auto& inst : set.instances)
        set.hunk_count = std::max<std::size_t>(set.hunk_count, inst.hunk_index);
    }
  }
  set.sort_by_id();
  return set;
}

LabelingSet load_labeling(const std::filesystem::path& path, std::optional<std::size_t> hunk_count) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read labeling file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return labeling_from_json(j, hunk_count);
}

void save_labeling(const std::filesystem::path& path, const LabelingSet& set) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << labeling_to_json(set).dump(2) << '\n';
}

}  // namespace hunklabel
