#include "hunklabel/refiner.hpp"

#include <algorithm>
#include <map>

#include "hunklabel/errors.hpp"
#include "hunklabel/labeler.hpp"
#include "text_util.hpp"

namespace hunklabel {

std::vector<StreamLabel> RefinerPlan::labels() const {
  std::vector<StreamLabel> out;
  for (const auto& e : entries) out.insert(out.end(), e.labels.begin(), e.labels.end());
  return out;
}

RefinerPlan plan_refinement(const PatchBundle& bundle, const LabelingSet& set,
                            std::size_t context_width) {
  std::map<std::uint32_t, std::vector<const LabelingInstance*>> by_hunk;
  for (const auto& inst : set.instances) by_hunk[inst.hunk_index].push_back(&inst);

  RefinerPlan plan;
  for (auto& sh : build_stream(bundle, context_width)) {
    const std::uint32_t h = sh.hunk->global_index;
    std::vector<StreamLabel> labels;
    auto it = by_hunk.find(h);
    if (it == by_hunk.end()) {
      labels.push_back({instance_id_for(h, 0), h, std::nullopt});
    } else {
      auto insts = it->second;
      std::sort(insts.begin(), insts.end(), [](auto* a, auto* b) { return a->id < b->id; });
      for (const auto* inst : insts)
        if (info(inst->label_type).refiner_eligible)
          labels.push_back({inst->id, h, inst->label_type});
    }
    if (!labels.empty()) plan.entries.push_back({std::move(sh), std::move(labels)});
  }
  return plan;
}

namespace {

struct Pending {
  std::size_t index;  // into result.instances
  std::vector<std::string> attributes;
  std::uint64_t parent;
};

std::uint32_t next_ordinal(const LabelingSet& set, std::uint32_t hunk) {
  std::uint32_t next = 0;
  for (const auto& inst : set.instances)
    if (inst.hunk_index == hunk)
      next = std::max<std::uint32_t>(next, static_cast<std::uint32_t>(inst.id % kIdsPerHunk) + 1);
  return next;
}

std::string id_text(std::uint64_t id) { return std::to_string(id); }

}  // namespace

RefinementResult apply_refinement(const LabelingSet& set, const RefinerPlan& plan,
                                  const RefinerReply& reply) {
  RefinementResult res{set, {}};
  auto& out = res.set;
  auto& rep = res.report;
  rep.reply_warnings = reply.warnings;

  auto index_of = [&out](std::uint64_t id) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < out.instances.size(); ++i)
      if (out.instances[i].id == id) return i;
    return std::nullopt;
  };

  // Types first, so that parents are checked against the final types.
  std::vector<Pending> pending;
  std::map<std::uint64_t, std::uint64_t> requested_parent;
  for (const auto& label : plan.labels()) {
    auto e = reply.entries.find(label.id);
    if (e == reply.entries.end() || e->second.defaulted) continue;
    const RefinerEntry& entry = e->second;

    if (!label.type) {
      if (!entry.updated_type) continue;  // hunk stays unlabeled
      LabelingInstance inst;
      inst.id = label.id;
      inst.hunk_index = label.hunk_index;
      inst.label_type = *entry.updated_type;
      out.instances.push_back(inst);
      rep.materialized.push_back(label.id);
      rep.type_changes.push_back({label.id, std::nullopt, inst.label_type});
      pending.push_back({out.instances.size() - 1, entry.attributes, entry.parent_id});
      continue;
    }

    auto idx = index_of(label.id);
    if (!idx) continue;
    LabelingInstance& inst = out.instances[*idx];
    const LabelType from = inst.label_type;
    if (entry.clears_type) {
      rep.warnings.push_back("label " + id_text(inst.id) + ": NONE for a labeled instance ignored");
    } else if (entry.updated_type && *entry.updated_type != from) {
      const LabelType to = *entry.updated_type;
      if (info(to).refiner_eligible || from == LabelType::LogicChange) {
        inst.label_type = to;
        rep.type_changes.push_back({inst.id, from, to});
      } else {
        rep.warnings.push_back("label " + id_text(inst.id) + ": change from " +
                               std::string(upper_name(from)) + " to " +
                               std::string(upper_name(to)) + " ignored");
      }
    }
    pending.push_back({*idx, entry.attributes, entry.parent_id});
  }

  // Attributes, splitting triples into separate instances.
  for (const auto& p : pending) {
    const LabelType t = out.instances[p.index].label_type;
    const std::uint64_t id = out.instances[p.index].id;
    requested_parent[id] = p.parent;
    if (!info(t).needs_attributes) {
      out.instances[p.index].attributes.clear();
      continue;
    }
    std::vector<std::vector<std::string>> triples;
    for (std::size_t i = 0; i + 3 <= p.attributes.size(); i += 3) {
      std::vector<std::string> tr(p.attributes.begin() + static_cast<std::ptrdiff_t>(i),
                                  p.attributes.begin() + static_cast<std::ptrdiff_t>(i + 3));
      for (auto& a : tr) a = std::string(text::trim(a));
      if (t == LabelType::Rename && !rename_kind_from_name(tr[0])) {
        const std::string upper = text::to_upper(tr[0]);
        if (!rename_kind_from_name(upper)) {
          rep.warnings.push_back("label " + id_text(id) + ": rename kind '" + tr[0] +
                                 "' unknown, triple dropped");
          continue;
        }
        tr[0] = upper;
      }
      triples.push_back(std::move(tr));
    }
    out.instances[p.index].attributes = triples.empty() ? std::vector<std::string>{} : triples[0];
    if (triples.size() < 2) continue;

    Split split{id, {}};
    const std::uint32_t hunk = out.instances[p.index].hunk_index;
    for (std::size_t k = 1; k < triples.size(); ++k) {
      LabelingInstance extra;
      extra.id = instance_id_for(hunk, next_ordinal(out, hunk));
      extra.hunk_index = hunk;
      extra.label_type = t;
      extra.attributes = std::move(triples[k]);
      split.new_ids.push_back(extra.id);
      requested_parent[extra.id] = p.parent;
      out.instances.push_back(std::move(extra));
    }
    rep.splits.push_back(std::move(split));
  }

  // Parents, in one pass over the final set.
  std::map<std::uint64_t, LabelType> type_of;
  for (const auto& inst : out.instances) type_of[inst.id] = inst.label_type;
  for (auto& inst : out.instances) {
    auto req = requested_parent.find(inst.id);
    const std::uint64_t want = req != requested_parent.end() ? req->second : inst.parent_id;
    std::string reason;
    if (want != 0) {
      if (!info(inst.label_type).needs_parent) {
        reason = std::string(upper_name(inst.label_type)) + " takes no parent";
      } else if (want == inst.id) {
        reason = "self reference";
      } else if (auto it = type_of.find(want); it == type_of.end()) {
        reason = "parent does not exist";
      } else if (it->second != inst.label_type) {
        reason = "parent is " + std::string(upper_name(it->second));
      }
    }
    if (reason.empty()) {
      inst.parent_id = want;
      continue;
    }
    inst.parent_id = 0;
    rep.repaired_parents.push_back({inst.id, want, reason});
    rep.warnings.push_back("label " + id_text(inst.id) + ": parent " + id_text(want) +
                           " dropped (" + reason + ")");
  }

  out.sort_by_id();
  return res;
}

RefinementResult run_refiner(const PatchBundle& bundle, const LabelingSet& set, Backend& backend,
                             const PromptLibrary& lib, std::size_t context_width) {
  const RefinerPlan plan = plan_refinement(bundle, set, context_width);
  if (plan.empty()) {
    RefinementResult res{set, {}};
    res.report.skipped = true;
    return res;
  }
  const PromptRequest req = render_refiner_prompt(lib, plan.entries);
  LlmResponse resp = complete(backend, req);
  RefinerReply reply;
  try {
    reply = parse_refiner_reply(resp.raw_text, req.covered_labels);
  } catch (const Error& e) {
    RefinementResult res{set, {}};
    res.report.warnings.push_back(std::string("refiner reply unusable, labels kept: ") + e.what());
    res.report.usage = resp.usage;
    return res;
  }
  RefinementResult res = apply_refinement(set, plan, reply);
  res.report.usage = resp.usage;
  return res;
}

nlohmann::json refinement_report_json(const RefinementReport& r) {
  auto type_name = [](std::optional<LabelType> t) {
    return t ? std::string(upper_name(*t)) : std::string("NONE");
  };
  nlohmann::json changes = nlohmann::json::array();
  for (const auto& c : r.type_changes)
    changes.push_back({{"id", c.id}, {"from", type_name(c.from)}, {"to", type_name(c.to)}});
  nlohmann::json splits = nlohmann::json::array();
  for (const auto& s : r.splits) splits.push_back({{"id", s.id}, {"new_ids", s.new_ids}});
  nlohmann::json repairs = nlohmann::json::array();
  for (const auto& p : r.repaired_parents)
    repairs.push_back({{"id", p.id}, {"requested_parent", p.requested}, {"reason", p.reason}});
  return {
      {"skipped", r.skipped},
      {"type_changes", std::move(changes)},
      {"splits", std::move(splits)},
      {"repaired_parents", std::move(repairs)},
      {"materialized", r.materialized},
      {"reply_warnings", warnings_json(r.reply_warnings)},
      {"warnings", r.warnings},
      {"usage",
       {{"input_tokens", r.usage.input_tokens},
        {"output_tokens", r.usage.output_tokens},
        {"estimated", r.usage.estimated}}},
  };
}

}  // namespace hunklabel
