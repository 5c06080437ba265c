#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hunklabel/diff.hpp"
#include "hunklabel/llm_client.hpp"
#include "hunklabel/prompting.hpp"
#include "hunklabel/taxonomy.hpp"

namespace hunklabel {

// Hunks holding a RENAME, RETYPE, CODE_MOVE or LOGIC_CHANGE instance, or no
// instance at all (listed with a NONE pseudo label, id 1000h), in patch order.
struct RefinerPlan {
  std::vector<RefinerStreamEntry> entries;

  bool empty() const { return entries.empty(); }
  std::vector<StreamLabel> labels() const;
};

RefinerPlan plan_refinement(const PatchBundle& bundle, const LabelingSet& set,
                            std::size_t context_width = kDefaultContextWidth);

struct TypeChange {
  std::uint64_t id = 0;
  std::optional<LabelType> from;  // empty for a materialized NONE label
  LabelType to = LabelType::LogicChange;
};

struct Split {
  std::uint64_t id = 0;
  std::vector<std::uint64_t> new_ids;
};

struct ParentRepair {
  std::uint64_t id = 0;
  std::uint64_t requested = 0;
  std::string reason;
};

struct RefinementReport {
  bool skipped = false;  // empty plan, no request sent
  std::vector<TypeChange> type_changes;
  std::vector<Split> splits;
  std::vector<ParentRepair> repaired_parents;
  std::vector<std::uint64_t> materialized;
  std::vector<ReplyWarning> reply_warnings;
  std::vector<std::string> warnings;  // one line per ignored or repaired item
  TokenUsage usage;
};

struct RefinementResult {
  LabelingSet set;
  RefinementReport report;
};

// Applies a parsed reply. Instances without a usable reply entry and
// instances outside the plan are left as they are. The result passes
// validate() whenever `set` does.
RefinementResult apply_refinement(const LabelingSet& set, const RefinerPlan& plan,
                                  const RefinerReply& reply);

// One request per patch; skipped for an empty plan. Backend errors
// propagate; an unusable reply leaves the set unchanged with a warning.
RefinementResult run_refiner(const PatchBundle& bundle, const LabelingSet& set, Backend& backend,
                             const PromptLibrary& lib,
                             std::size_t context_width = kDefaultContextWidth);

nlohmann::json refinement_report_json(const RefinementReport& report);

}  // namespace hunklabel
