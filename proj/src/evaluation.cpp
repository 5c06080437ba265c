#include "hunklabel/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "hunklabel/errors.hpp"

namespace hunklabel {

namespace {

void check_domains(const PerHunkTypes& pred, const PerHunkTypes& gt) {
  if (gt.empty() && pred.empty()) throw EmptyBenchmark("benchmark has no diff hunks");
  if (pred.size() != gt.size())
    throw DomainMismatch("prediction covers " + std::to_string(pred.size()) +
                         " hunks, ground truth " + std::to_string(gt.size()));
}

// |A ∩ B| / |denominator side| with the NO_LABEL stand-in for empty sets.
double overlap(const TypeSet& a, const TypeSet& b, bool over_a) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::size_t common = 0;
  for (auto t : a) common += b.count(t);
  return static_cast<double>(common) / static_cast<double>(over_a ? a.size() : b.size());
}

double mean_overlap(const PerHunkTypes& pred, const PerHunkTypes& gt, bool over_pred) {
  check_domains(pred, gt);
  double sum = 0;
  for (std::size_t h = 0; h < gt.size(); ++h) sum += overlap(pred[h], gt[h], over_pred);
  return sum / static_cast<double>(gt.size());
}

using Key = std::pair<std::uint32_t, LabelType>;  // (hunk, type)

std::map<Key, std::vector<const LabelingInstance*>> group(const LabelingSet& set,
                                                          std::initializer_list<LabelType> types) {
  std::map<Key, std::vector<const LabelingInstance*>> out;
  for (const auto& inst : set.instances)
    if (std::find(types.begin(), types.end(), inst.label_type) != types.end())
      out[{inst.hunk_index, inst.label_type}].push_back(&inst);
  return out;
}

std::uint64_t parent_hunk(const LabelingSet& set, const LabelingInstance& inst) {
  if (inst.parent_id == 0) return 0;
  if (const auto* p = set.find(inst.parent_id)) return p->hunk_index;
  return inst.parent_id / kIdsPerHunk;
}

// Equal positions over the first three fields, 0..3.
int field_matches(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 3;
  if (a.empty() || b.empty()) return 0;
  auto trim = [](const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return std::string();
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
  };
  int n = 0;
  for (std::size_t i = 0; i < 3 && i < a.size() && i < b.size(); ++i)
    if (trim(a[i]) == trim(b[i])) ++n;
  return n;
}

constexpr std::size_t kExactAssignmentLimit = 16;

// Largest total weight of a one-to-one pairing of rows and columns.
int best_assignment(const std::vector<std::vector<int>>& w) {
  const std::size_t rows = w.size();
  const std::size_t cols = rows ? w[0].size() : 0;
  if (rows == 0 || cols == 0) return 0;
  if (cols > rows) {
    std::vector<std::vector<int>> t(cols, std::vector<int>(rows));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) t[c][r] = w[r][c];
    return best_assignment(t);
  }
  if (cols <= kExactAssignmentLimit) {
    // Rows are processed in turn; mask holds the columns already taken.
    std::vector<int> dp(std::size_t{1} << cols, -1);
    dp[0] = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<int> next = dp;  // row r left unpaired
      for (std::size_t mask = 0; mask < dp.size(); ++mask) {
        if (dp[mask] < 0) continue;
        for (std::size_t c = 0; c < cols; ++c) {
          if (mask & (std::size_t{1} << c)) continue;
          auto& slot = next[mask | (std::size_t{1} << c)];
          slot = std::max(slot, dp[mask] + w[r][c]);
        }
      }
      dp = std::move(next);
    }
    return *std::max_element(dp.begin(), dp.end());
  }
  // Greedy fallback for unusually crowded hunks.
  struct Cell { int weight; std::size_t r, c; };
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) cells.push_back({w[r][c], r, c});
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) { return a.weight > b.weight; });
  std::vector<bool> used_r(rows), used_c(cols);
  int total = 0;
  for (const auto& cell : cells) {
    if (used_r[cell.r] || used_c[cell.c]) continue;
    used_r[cell.r] = used_c[cell.c] = true;
    total += cell.weight;
  }
  return total;
}

std::string fmt(std::optional<double> v, int precision = 3) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

nlohmann::json ratio_json(const Ratio& r) {
  auto v = r.value();
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json pr_json(const std::map<LabelType, PrecisionRecall>& m) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [t, pr] : m)
    out[std::string(upper_name(t))] = {{"precision", ratio_json(pr.precision)},
                                       {"recall", ratio_json(pr.recall)}};
  return out;
}

std::string row_name(const std::optional<LabelType>& t) {
  return t ? std::string(upper_name(*t)) : std::string("NO_LABEL");
}

}  // namespace

double avg_iop(const PerHunkTypes& pred, const PerHunkTypes& gt) {
  return mean_overlap(pred, gt, true);
}

double avg_iogt(const PerHunkTypes& pred, const PerHunkTypes& gt) {
  return mean_overlap(pred, gt, false);
}

PerTypeScores per_type_pr(const PerHunkTypes& pred, const PerHunkTypes& gt) {
  PerTypeScores out;
  for (const auto& ti : all_label_types()) out[ti.type] = {};
  out[std::nullopt] = {};
  const std::size_t n = std::min(pred.size(), gt.size());
  for (std::size_t h = 0; h < n; ++h) {
    for (const auto& ti : all_label_types()) {
      const bool p = pred[h].count(ti.type) > 0;
      const bool g = gt[h].count(ti.type) > 0;
      auto& s = out[ti.type];
      if (p) s.precision.denominator += 1;
      if (g) s.recall.denominator += 1, ++s.support;
      if (p && g) s.precision.numerator += 1, s.recall.numerator += 1;
    }
    const bool p = pred[h].empty();
    const bool g = gt[h].empty();
    auto& s = out[std::nullopt];
    if (p) s.precision.denominator += 1;
    if (g) s.recall.denominator += 1, ++s.support;
    if (p && g) s.precision.numerator += 1, s.recall.numerator += 1;
  }
  return out;
}

std::map<LabelType, PrecisionRecall> parent_scores(const LabelingSet& pred, const LabelingSet& gt) {
  std::map<LabelType, PrecisionRecall> out{{LabelType::Rename, {}}, {LabelType::CodeMove, {}}};
  const auto p_groups = group(pred, {LabelType::Rename, LabelType::CodeMove});
  const auto g_groups = group(gt, {LabelType::Rename, LabelType::CodeMove});

  for (const auto& [key, insts] : p_groups) out[key.second].precision.denominator += insts.size();
  for (const auto& [key, insts] : g_groups) out[key.second].recall.denominator += insts.size();

  for (const auto& [key, g_insts] : g_groups) {
    auto it = p_groups.find(key);
    if (it == p_groups.end()) continue;
    std::map<std::uint64_t, std::size_t> g_count, p_count;
    for (const auto* i : g_insts) ++g_count[parent_hunk(gt, *i)];
    for (const auto* i : it->second) ++p_count[parent_hunk(pred, *i)];
    std::size_t matches = 0;
    for (const auto& [v, c] : p_count)
      if (auto g = g_count.find(v); g != g_count.end()) matches += std::min(c, g->second);
    out[key.second].precision.numerator += static_cast<double>(matches);
    out[key.second].recall.numerator += static_cast<double>(matches);
  }
  return out;
}

std::map<LabelType, PrecisionRecall> attribute_scores(const LabelingSet& pred,
                                                      const LabelingSet& gt) {
  std::map<LabelType, PrecisionRecall> out{{LabelType::Retype, {}}, {LabelType::Rename, {}}};
  const auto p_groups = group(pred, {LabelType::Rename, LabelType::Retype});
  const auto g_groups = group(gt, {LabelType::Rename, LabelType::Retype});

  for (const auto& [key, insts] : p_groups) out[key.second].precision.denominator += insts.size();
  for (const auto& [key, insts] : g_groups) out[key.second].recall.denominator += insts.size();

  for (const auto& [key, g_insts] : g_groups) {
    auto it = p_groups.find(key);
    if (it == p_groups.end()) continue;
    std::vector<std::vector<int>> w(it->second.size(), std::vector<int>(g_insts.size()));
    for (std::size_t r = 0; r < it->second.size(); ++r)
      for (std::size_t c = 0; c < g_insts.size(); ++c)
        w[r][c] = field_matches(it->second[r]->attributes, g_insts[c]->attributes);
    const double score = best_assignment(w) / 3.0;
    out[key.second].precision.numerator += score;
    out[key.second].recall.numerator += score;
  }
  return out;
}

EvaluationReport evaluate(const LabelingSet& pred, const LabelingSet& gt,
                          std::optional<CostInfo> cost) {
  if (pred.hunk_count != gt.hunk_count)
    throw DomainMismatch("prediction covers " + std::to_string(pred.hunk_count) +
                         " hunks, ground truth " + std::to_string(gt.hunk_count));
  const auto p = per_hunk_types(pred);
  const auto g = per_hunk_types(gt);
  EvaluationReport r;
  r.hunk_count = gt.hunk_count;
  r.avg_iop = avg_iop(p, g);
  r.avg_iogt = avg_iogt(p, g);
  r.per_type = per_type_pr(p, g);
  r.parent = parent_scores(pred, gt);
  r.attributes = attribute_scores(pred, gt);
  r.cost = cost;
  return r;
}

nlohmann::json report_json(const EvaluationReport& r) {
  nlohmann::json per_type = nlohmann::json::object();
  for (const auto& [t, s] : r.per_type)
    per_type[row_name(t)] = {{"precision", ratio_json(s.precision)},
                             {"recall", ratio_json(s.recall)},
                             {"support", s.support}};
  nlohmann::json out{
      {"hunk_count", r.hunk_count},
      {"avg_iop", r.avg_iop},
      {"avg_iogt", r.avg_iogt},
      {"per_type", std::move(per_type)},
      {"parent_scores", pr_json(r.parent)},
      {"attribute_scores", pr_json(r.attributes)},
  };
  if (r.cost)
    out["cost"] = {{"input_per_hunk", r.cost->input_per_hunk},
                   {"output_per_hunk", r.cost->output_per_hunk},
                   {"estimated", r.cost->estimated}};
  else
    out["cost"] = nullptr;
  return out;
}

std::string report_table(const EvaluationReport& r) {
  std::ostringstream os;
  char line[160];
  os << "hunks: " << r.hunk_count << "\n";
  std::snprintf(line, sizeof line, "%-10s %-10s %-10s %-10s\n", "Avg-IoP", "Avg-IoGT", "In/hunk",
                "Out/hunk");
  os << line;
  std::string in = "-", out = "-";
  if (r.cost) {
    std::snprintf(line, sizeof line, "%.0f%s", r.cost->input_per_hunk, r.cost->estimated ? "~" : "");
    in = line;
    std::snprintf(line, sizeof line, "%.0f%s", r.cost->output_per_hunk, r.cost->estimated ? "~" : "");
    out = line;
  }
  std::snprintf(line, sizeof line, "%-10s %-10s %-10s %-10s\n", fmt(r.avg_iop).c_str(),
                fmt(r.avg_iogt).c_str(), in.c_str(), out.c_str());
  os << line << "\n";

  std::snprintf(line, sizeof line, "%-26s %-10s %-10s %s\n", "type", "precision", "recall",
                "support");
  os << line;
  for (const auto& [t, s] : r.per_type) {
    std::snprintf(line, sizeof line, "%-26s %-10s %-10s %zu\n", row_name(t).c_str(),
                  fmt(s.precision.value()).c_str(), fmt(s.recall.value()).c_str(), s.support);
    os << line;
  }
  os << "\n";

  std::snprintf(line, sizeof line, "%-26s %-10s %-10s\n", "refiner score", "precision", "recall");
  os << line;
  auto rows = [&](const char* what, const std::map<LabelType, PrecisionRecall>& m) {
    for (const auto& [t, pr] : m) {
      const std::string name = std::string(upper_name(t)) + " " + what;
      std::snprintf(line, sizeof line, "%-26s %-10s %-10s\n", name.c_str(),
                    fmt(pr.precision.value()).c_str(), fmt(pr.recall.value()).c_str());
      os << line;
    }
  };
  rows("parent", r.parent);
  rows("attributes", r.attributes);
  return os.str();
}

std::string per_type_csv(const EvaluationReport& r) {
  std::ostringstream os;
  os << "type,precision,recall,support\n";
  auto cell = [](std::optional<double> v) { return v ? fmt(v, 6) : std::string(); };
  for (const auto& [t, s] : r.per_type)
    os << row_name(t) << ',' << cell(s.precision.value()) << ',' << cell(s.recall.value()) << ','
       << s.support << "\n";
  return os.str();
}

bool all_ones(const EvaluationReport& r) {
  auto one = [](const Ratio& x) { return !x.value() || *x.value() == 1.0; };
  if (r.avg_iop != 1.0 || r.avg_iogt != 1.0) return false;
  for (const auto& [t, s] : r.per_type)
    if (!one(s.precision) || !one(s.recall)) return false;
  for (const auto* m : {&r.parent, &r.attributes})
    for (const auto& [t, pr] : *m)
      if (!one(pr.precision) || !one(pr.recall)) return false;
  return true;
}

}  // namespace hunklabel
