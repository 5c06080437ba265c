#include "hunklabel/taxonomy.hpp"

#include <algorithm>
#include <map>

#include "hunklabel/errors.hpp"
#include "text_util.hpp"

namespace hunklabel {

namespace {

constexpr std::array<LabelTypeInfo, kLabelTypeCount> kLabelTypes{{
    {LabelType::Documentation, "DOCUMENTATION", "documentation",
     "adding new or changing existing comments or descriptions. Also include explicit edits "
     "of .txt, .md or similar files.",
     false, false, false},
    {LabelType::Testing, "TESTING", "testing", "changes to testing code.", false, false, false},
    {LabelType::OutputHandling, "OUTPUT_HANDLING", "output_handling",
     "changes to code that handles stdout, stderr, writes to output files, print statements, "
     "etc.",
     false, false, false},
    {LabelType::Retype, "RETYPE", "retype",
     "changing the type of a variable or attribute. examples: changed int to bool, as a "
     "consequence conditions are different, changed int to long, return type of a method "
     "returns base class rather than inherited class.",
     false, true, true},
    {LabelType::CodeMove, "CODE_MOVE", "code_move",
     "moving code from one location to another, this label should be added at the diff hunk "
     "where the code was removed and where it was added. examples: replacing a chunk of code "
     "with a function that runs the same code. Moving code from one file to another.",
     true, false, true},
    {LabelType::StyleChange, "STYLE_CHANGE", "style_change",
     "changes that modify the appearance of the code or the writing style but not the abstract "
     "syntax tree (AST). examples: move { from same line to line below, change comment style "
     "from // to /* */, split long lines, aligning and indentation (when the indentation does "
     "not matter), and other cosmetic changes.",
     false, false, false},
    {LabelType::Logging, "LOGGING", "logging",
     "everything related to logging, initializing the logger, summarizing the log, writing to "
     "the log, etc.",
     false, false, false},
    {LabelType::Rename, "RENAME", "rename",
     "only changes to the name of a variable, method, attribute, class, parameter or package.",
     true, true, true},
    {LabelType::ErrorHandling, "ERROR_HANDLING", "error_handling",
     "changes that affect when an error or warning is raised or what happens when they are "
     "raised. examples: changes in the try-catch block logic, changes in exception types.",
     false, false, false},
    {LabelType::LogicChange, "LOGIC_CHANGE", "logic_change",
     "any change that modifies the application execution, for example modifies the control "
     "flow or results in different application behavior. If you suspect that a diff hunk might "
     "be renaming, retyping, or code_move but you lack context to decide, label it as "
     "logic_change.",
     false, false, true},
    {LabelType::InternalInterfaceChange, "INTERNAL_INTERFACE_CHANGE",
     "internal_interface_change",
     "The interface of a class or a package are all the publicly accessible elements. "
     "Interface changes are changes to the declarations of said elements. The word internal "
     "refers to elements that are internal to the application but not internal to a certain "
     "file or class. examples: changing methods between being Public or Private, modifying "
     "public method declarations or public attributes.",
     false, false, false},
    {LabelType::ExternalInterfaceChange, "EXTERNAL_INTERFACE_CHANGE",
     "external_interface_change",
     "changes to the interface itself or user interfaces, the program's external API, command "
     "line interface, etc. examples: adding or modifying CLI arguments.",
     false, false, false},
}};

std::string normalize_label_name(std::string_view name) {
  std::string out = text::to_lower(text::trim(name));
  for (char& c : out)
    if (c == ' ' || c == '-') c = '_';
  return out;
}

}  // namespace

const std::array<LabelTypeInfo, kLabelTypeCount>& all_label_types() { return kLabelTypes; }

const LabelTypeInfo& info(LabelType t) { return kLabelTypes[static_cast<std::size_t>(t)]; }
std::string_view upper_name(LabelType t) { return info(t).upper_name; }
std::string_view snake_name(LabelType t) { return info(t).snake_name; }

std::optional<LabelType> label_type_from_name(std::string_view name) {
  static const std::map<std::string, LabelType> aliases{
      {"renaming", LabelType::Rename},
      {"retyping", LabelType::Retype},
  };
  const std::string key = normalize_label_name(name);
  for (const auto& t : kLabelTypes)
    if (key == t.snake_name) return t.type;
  if (auto it = aliases.find(key); it != aliases.end()) return it->second;
  return std::nullopt;
}

std::optional<RenameKind> rename_kind_from_name(std::string_view name) {
  if (name == "VAR") return RenameKind::Var;
  if (name == "CLASS") return RenameKind::Class;
  if (name == "PACKAGE") return RenameKind::Package;
  if (name == "METHOD") return RenameKind::Method;
  if (name == "ATTRIBUTE") return RenameKind::Attribute;
  if (name == "PARAMETER") return RenameKind::Parameter;
  return std::nullopt;
}

std::string_view to_string(RenameKind k) {
  switch (k) {
    case RenameKind::Var: return "VAR";
    case RenameKind::Class: return "CLASS";
    case RenameKind::Package: return "PACKAGE";
    case RenameKind::Method: return "METHOD";
    case RenameKind::Attribute: return "ATTRIBUTE";
    case RenameKind::Parameter: return "PARAMETER";
  }
  return "";
}

const LabelingInstance* LabelingSet::find(std::uint64_t id) const {
  for (const auto& inst : instances)
    if (inst.id == id) return &inst;
  return nullptr;
}

void LabelingSet::sort_by_id() {
  std::stable_sort(instances.begin(), instances.end(),
                   [](const auto& a, const auto& b) { return a.id < b.id; });
}

std::uint64_t instance_id_for(std::uint32_t hunk_index, std::uint32_t ordinal) {
  if (hunk_index == 0) throw UnknownHunk("hunk indices start at 1");
  if (ordinal >= kIdsPerHunk)
    throw OrdinalOverflow("hunk " + std::to_string(hunk_index) + " has more than " +
                          std::to_string(kIdsPerHunk) + " labels");
  return kIdsPerHunk * hunk_index + ordinal;
}

TypeSet labels_for_hunk(const LabelingSet& set, std::uint32_t hunk_index) {
  if (hunk_index == 0 || hunk_index > set.hunk_count)
    throw UnknownHunk("hunk " + std::to_string(hunk_index) + " is outside 1.." +
                      std::to_string(set.hunk_count));
  TypeSet out;
  for (const auto& inst : set.instances)
    if (inst.hunk_index == hunk_index) out.insert(inst.label_type);
  return out;
}

std::vector<TypeSet> per_hunk_types(const LabelingSet& set) {
  std::vector<TypeSet> out(set.hunk_count);
  for (const auto& inst : set.instances)
    if (inst.hunk_index >= 1 && inst.hunk_index <= set.hunk_count)
      out[inst.hunk_index - 1].insert(inst.label_type);
  return out;
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::ZeroId: return "ZeroId";
    case ViolationKind::DuplicateId: return "DuplicateId";
    case ViolationKind::HunkOutOfRange: return "HunkOutOfRange";
    case ViolationKind::SelfParent: return "SelfParent";
    case ViolationKind::DanglingParent: return "DanglingParent";
    case ViolationKind::WrongTypeParent: return "WrongTypeParent";
    case ViolationKind::UnexpectedParent: return "UnexpectedParent";
    case ViolationKind::BadAttributeArity: return "BadAttributeArity";
    case ViolationKind::UnknownRenameKind: return "UnknownRenameKind";
    case ViolationKind::UnexpectedAttributes: return "UnexpectedAttributes";
  }
  return "";
}

std::vector<Violation> validate(const LabelingSet& set) {
  std::vector<Violation> out;
  auto add = [&](ViolationKind k, const LabelingInstance& inst, std::string msg) {
    out.push_back({k, inst.id, "instance " + std::to_string(inst.id) + ": " + std::move(msg)});
  };

  std::map<std::uint64_t, const LabelingInstance*> by_id;
  for (const auto& inst : set.instances) {
    if (inst.id == 0) add(ViolationKind::ZeroId, inst, "id 0 is reserved for 'no parent'");
    if (!by_id.emplace(inst.id, &inst).second)
      add(ViolationKind::DuplicateId, inst, "duplicate id");
    if (inst.hunk_index == 0 || inst.hunk_index > set.hunk_count)
      add(ViolationKind::HunkOutOfRange, inst,
          "hunk " + std::to_string(inst.hunk_index) + " outside 1.." +
              std::to_string(set.hunk_count));
  }

  for (const auto& inst : set.instances) {
    const auto& ti = info(inst.label_type);
    if (inst.parent_id != 0) {
      if (!ti.needs_parent) {
        add(ViolationKind::UnexpectedParent, inst,
            std::string(ti.upper_name) + " instances cannot have a parent");
      } else if (inst.parent_id == inst.id) {
        add(ViolationKind::SelfParent, inst, "instance is its own parent");
      } else if (auto it = by_id.find(inst.parent_id); it == by_id.end()) {
        add(ViolationKind::DanglingParent, inst,
            "parent " + std::to_string(inst.parent_id) + " does not exist");
      } else if (it->second->label_type != inst.label_type) {
        add(ViolationKind::WrongTypeParent, inst,
            "parent " + std::to_string(inst.parent_id) + " is " +
                std::string(upper_name(it->second->label_type)) + ", not " +
                std::string(ti.upper_name));
      }
    }

    if (inst.attributes.empty()) continue;
    if (!ti.needs_attributes) {
      add(ViolationKind::UnexpectedAttributes, inst,
          std::string(ti.upper_name) + " instances carry no attributes");
      continue;
    }
    if (inst.attributes.size() != 3) {
      add(ViolationKind::BadAttributeArity, inst,
          "expected 3 attributes, got " + std::to_string(inst.attributes.size()));
      continue;
    }
    if (inst.label_type == LabelType::Rename &&
        !rename_kind_from_name(text::trim(inst.attributes[0])))
      add(ViolationKind::UnknownRenameKind, inst,
          "unknown rename kind '" + inst.attributes[0] + "'");
  }
  return out;
}

}  // namespace hunklabel
