#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hunklabel/diff.hpp"
#include "hunklabel/llm_client.hpp"
#include "hunklabel/prompting.hpp"
#include "hunklabel/taxonomy.hpp"

namespace hunklabel {

struct LabelerOptions {
  std::size_t context_width = kDefaultContextWidth;
  std::size_t parallelism = 4;  // concurrent requests in hunk and file modes
};

struct RequestFailure {
  std::size_t request_index = 0;
  std::vector<std::uint32_t> hunks;
  std::string error;
};

struct LabelerRun {
  LabelerMode mode = LabelerMode::Hunk;
  std::vector<TypeSet> types;  // T(h) at position h-1
  std::vector<ReplyWarning> warnings;
  TokenUsage usage;
  std::size_t requests = 0;
  std::vector<RequestFailure> failures;
};

// Builds the stream entries for every hunk, in patch order.
std::vector<StreamHunk> build_stream(const PatchBundle& bundle,
                                     std::size_t context_width = kDefaultContextWidth);

// The prompts the labeler would send, in request order. Throws EmptyInput for
// a bundle without hunks.
std::vector<PromptRequest> labeler_requests(const PatchBundle& bundle, LabelerMode mode,
                                            const PromptLibrary& lib,
                                            const LabelerOptions& options = {});

// T(h) -> instances with id 1000h+ordinal (taxonomy order), parent 0 and no
// attributes.
LabelingSet labeling_from_types(const std::vector<TypeSet>& types);

// Backend and parse failures of single requests in hunk and file modes are
// recorded and leave their hunks unlabeled. AuthError always propagates, as
// does a backend error in patch mode.
std::pair<LabelingSet, LabelerRun> run_labeler(const PatchBundle& bundle, LabelerMode mode,
                                               Backend& backend, const PromptLibrary& lib,
                                               const LabelerOptions& options = {});

// Total tokens divided by the hunk count. Throws std::invalid_argument for
// a zero hunk count.
std::pair<double, double> cost_per_hunk(const LabelerRun& run, std::size_t hunk_count);

nlohmann::json run_report_json(const LabelerRun& run);
nlohmann::json warnings_json(const std::vector<ReplyWarning>& warnings);

}  // namespace hunklabel
