#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hunklabel {

// Declaration order is significant: it fixes the ordinal of each label within
// a hunk and the order of the label list in prompts.
enum class LabelType : std::uint8_t {
  Documentation,
  Testing,
  OutputHandling,
  Retype,
  CodeMove,
  StyleChange,
  Logging,
  Rename,
  ErrorHandling,
  LogicChange,
  InternalInterfaceChange,
  ExternalInterfaceChange,
};

inline constexpr std::size_t kLabelTypeCount = 12;

struct LabelTypeInfo {
  LabelType type;
  std::string_view upper_name;  // RENAME, used in refiner streams and output JSON
  std::string_view snake_name;  // rename, used in labeler prompts and replies
  std::string_view description;
  bool needs_parent;
  bool needs_attributes;
  bool refiner_eligible;
};

const std::array<LabelTypeInfo, kLabelTypeCount>& all_label_types();
const LabelTypeInfo& info(LabelType t);
std::string_view upper_name(LabelType t);
std::string_view snake_name(LabelType t);

// Case-insensitive; accepts upper and snake spellings, spaces or hyphens for
// underscores, and the aliases "renaming"/"retyping".
std::optional<LabelType> label_type_from_name(std::string_view name);

enum class RenameKind { Var, Class, Package, Method, Attribute, Parameter };

// Exact, uppercase only.
std::optional<RenameKind> rename_kind_from_name(std::string_view name);
std::string_view to_string(RenameKind k);

using TypeSet = std::set<LabelType>;

struct LabelingInstance {
  std::uint64_t id = 0;
  std::uint32_t hunk_index = 0;
  LabelType label_type = LabelType::LogicChange;
  std::uint64_t parent_id = 0;  // 0: no parent
  std::vector<std::string> attributes;

  bool operator==(const LabelingInstance&) const = default;
};

struct LabelingSet {
  std::vector<LabelingInstance> instances;
  std::size_t hunk_count = 0;

  const LabelingInstance* find(std::uint64_t id) const;
  void sort_by_id();

  bool operator==(const LabelingSet&) const = default;
};

inline constexpr std::uint64_t kIdsPerHunk = 1000;

// 1000 * hunk_index + ordinal. Throws OrdinalOverflow for ordinal >= 1000.
std::uint64_t instance_id_for(std::uint32_t hunk_index, std::uint32_t ordinal);

// Throws UnknownHunk when hunk_index is outside 1..set.hunk_count.
TypeSet labels_for_hunk(const LabelingSet& set, std::uint32_t hunk_index);

// T(h) for h = 1..hunk_count, at position h-1.
std::vector<TypeSet> per_hunk_types(const LabelingSet& set);

enum class ViolationKind {
  ZeroId,
  DuplicateId,
  HunkOutOfRange,
  SelfParent,
  DanglingParent,
  WrongTypeParent,
  UnexpectedParent,
  BadAttributeArity,
  UnknownRenameKind,
  UnexpectedAttributes,
};

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::uint64_t instance_id;
  std::string message;
};

std::vector<Violation> validate(const LabelingSet& set);

}  // namespace hunklabel
