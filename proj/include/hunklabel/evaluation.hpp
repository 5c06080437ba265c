#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hunklabel/taxonomy.hpp"

namespace hunklabel {

using PerHunkTypes = std::vector<TypeSet>;  // T(h) at position h-1

// Mean per-hunk |T ∩ T_GT| / |T|. A hunk's empty set stands for the single
// NO_LABEL marker on either side, so two empty sets score 1 and one empty set
// scores 0. Throws EmptyBenchmark for zero hunks and DomainMismatch for
// different hunk counts.
double avg_iop(const PerHunkTypes& pred, const PerHunkTypes& gt);
// Same with |T_GT| as denominator.
double avg_iogt(const PerHunkTypes& pred, const PerHunkTypes& gt);

// A fraction whose denominator may be zero; empty means undefined.
struct Ratio {
  double numerator = 0;
  double denominator = 0;

  std::optional<double> value() const {
    if (denominator == 0) return std::nullopt;
    return numerator / denominator;
  }
};

struct TypeScore {
  Ratio precision;
  Ratio recall;
  std::size_t support = 0;  // hunks carrying the type in the ground truth
};

// Hunk-level counts per label type. The NO_LABEL row (key std::nullopt)
// scores the unlabeled hunks the same way.
using PerTypeScores = std::map<std::optional<LabelType>, TypeScore>;
PerTypeScores per_type_pr(const PerHunkTypes& pred, const PerHunkTypes& gt);

struct PrecisionRecall {
  Ratio precision;
  Ratio recall;
};

// RENAME and CODE_MOVE. Instances are compared on the hunk of their parent
// (0 for none); matching is one-to-one per hunk.
std::map<LabelType, PrecisionRecall> parent_scores(const LabelingSet& pred, const LabelingSet& gt);

// RENAME and RETYPE. Per hunk, instances are paired by the assignment with
// the most equal attribute positions; a pair contributes matches/3. Two
// attribute lists that are both empty count as a full match.
std::map<LabelType, PrecisionRecall> attribute_scores(const LabelingSet& pred,
                                                      const LabelingSet& gt);

struct CostInfo {
  double input_per_hunk = 0;
  double output_per_hunk = 0;
  bool estimated = false;
};

struct EvaluationReport {
  std::size_t hunk_count = 0;
  double avg_iop = 0;
  double avg_iogt = 0;
  PerTypeScores per_type;
  std::map<LabelType, PrecisionRecall> parent;
  std::map<LabelType, PrecisionRecall> attributes;
  std::optional<CostInfo> cost;
};

// Throws DomainMismatch when the hunk counts differ, EmptyBenchmark for an
// empty patch.
EvaluationReport evaluate(const LabelingSet& pred, const LabelingSet& gt,
                          std::optional<CostInfo> cost = std::nullopt);

// Undefined values are written as null.
nlohmann::json report_json(const EvaluationReport& r);
std::string report_table(const EvaluationReport& r);
// type,precision,recall,support; undefined values left empty.
std::string per_type_csv(const EvaluationReport& r);

// Every defined value equals 1.
bool all_ones(const EvaluationReport& r);

}  // namespace hunklabel
