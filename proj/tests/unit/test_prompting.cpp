#include <gtest/gtest.h>

#include "hunklabel/bundle_io.hpp"
#include "hunklabel/errors.hpp"
#include "hunklabel/labeler.hpp"
#include "hunklabel/mock_backends.hpp"
#include "hunklabel/prompting.hpp"
#include "hunklabel/refiner.hpp"
#include "test_support.hpp"

using namespace hunklabel;
namespace ts = testing_support;

namespace {

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

std::string golden(const std::string& name) { return ts::slurp(ts::data_dir() / "golden" / name); }

const char* kFourHunks =
    "diff --git a/a.py b/a.py\n--- a/a.py\n+++ b/a.py\n"
    "@@ -1 +1 @@\n-x = 1\n+x = 2\n"
    "@@ -9 +9 @@ def f():\n-    return 1\n+    return 2\n"
    "diff --git a/b.py b/b.py\n--- a/b.py\n+++ b/b.py\n"
    "@@ -3 +3 @@\n-print(1)\n+print(2)\n"
    "@@ -7,0 +8 @@ class C:\n+    pass\n";

}  // namespace

TEST(PromptGolden, PerHunk) {
  const auto b = load_bundle(ts::bundle_dir("shop")).bundle;
  const auto reqs = labeler_requests(b, LabelerMode::Hunk, ts::prompts());
  ASSERT_EQ(reqs.size(), b.hunk_count());
  EXPECT_EQ(reqs[0].text, golden("labeler_hunk.txt"));
}

TEST(PromptGolden, PerFile) {
  const auto b = load_bundle(ts::bundle_dir("shop")).bundle;
  const auto reqs = labeler_requests(b, LabelerMode::File, ts::prompts());
  ASSERT_EQ(reqs.size(), 3u);
  EXPECT_EQ(reqs[1].text, golden("labeler_file.txt"));
}

TEST(PromptGolden, PerPatch) {
  const auto b = load_bundle(ts::bundle_dir("shop")).bundle;
  const auto reqs = labeler_requests(b, LabelerMode::Patch, ts::prompts());
  ASSERT_EQ(reqs.size(), 1u);
  EXPECT_EQ(reqs[0].text, golden("labeler_patch.txt"));
}

TEST(PromptGolden, Refiner) {
  const auto disk = load_bundle(ts::bundle_dir("shop"));
  OracleBackend oracle(*disk.ground_truth);
  const auto [labels, run] = run_labeler(disk.bundle, LabelerMode::File, oracle, ts::prompts());
  const auto plan = plan_refinement(disk.bundle, labels);
  const auto req = render_refiner_prompt(ts::prompts(), plan.entries);
  EXPECT_EQ(req.text, golden("refiner.txt"));
}

TEST(PromptText, AppendixSnippetsPresent) {
  const std::string hunk = golden("labeler_hunk.txt");
  const std::string refiner = golden("refiner.txt");
  for (const auto* s : {&hunk, &refiner})
    EXPECT_NE(s->find("Do not start the JSON with ```json or end with ```,"), std::string::npos);
  EXPECT_NE(refiner.find("Note that the parent label might appear after its children in the stream."),
            std::string::npos);
  EXPECT_NE(hunk.find("pandas"), std::string::npos);
  EXPECT_NE(golden("labeler_patch.txt").find("pandas"), std::string::npos);
}

TEST(LabelerPrompt, PerHunkShape) {
  const auto b = parse_patch(kFourHunks);
  const auto reqs = labeler_requests(b, LabelerMode::Hunk, ts::prompts());
  ASSERT_EQ(reqs.size(), 4u);
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    EXPECT_EQ(reqs[i].kind, TemplateKind::LabelerHunk);
    EXPECT_EQ(reqs[i].covered_hunks, std::vector<std::uint32_t>{static_cast<std::uint32_t>(i + 1)});
    EXPECT_NE(reqs[i].text.find("Here is the diff hunk and some context:"), std::string::npos);
    EXPECT_EQ(reqs[i].text.find("Diff Hunk Stream"), std::string::npos);
    EXPECT_EQ(reqs[i].text.find("{input_stream}"), std::string::npos);
  }
}

TEST(LabelerPrompt, PerPatchGroupsFiles) {
  const auto b = parse_patch(kFourHunks);
  const auto reqs = labeler_requests(b, LabelerMode::Patch, ts::prompts());
  ASSERT_EQ(reqs.size(), 1u);
  const std::string& t = reqs[0].text;
  EXPECT_EQ(reqs[0].kind, TemplateKind::LabelerPatch);
  EXPECT_EQ(reqs[0].covered_hunks, (std::vector<std::uint32_t>{1, 2, 3, 4}));
  EXPECT_EQ(count_of(t, "In file a.py:"), 1u);
  EXPECT_EQ(count_of(t, "In file b.py:"), 1u);
  std::size_t last = t.find("In file a.py:");
  ASSERT_NE(last, std::string::npos);
  for (int i = 1; i <= 4; ++i) {
    const std::string marker = "Diff hunk number " + std::to_string(i) + ":";
    EXPECT_EQ(count_of(t, marker), 1u) << marker;
    const auto pos = t.find(marker);
    EXPECT_GT(pos, last);
    last = pos;
    if (i == 2) {
      EXPECT_GT(t.find("In file b.py:"), pos);
    }
  }
}

TEST(LabelerPrompt, PerFileCoversOneFile) {
  const auto b = parse_patch(kFourHunks);
  const auto reqs = labeler_requests(b, LabelerMode::File, ts::prompts());
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0].covered_hunks, (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(reqs[1].covered_hunks, (std::vector<std::uint32_t>{3, 4}));
  EXPECT_EQ(reqs[1].text.find("a.py"), std::string::npos);
}

TEST(LabelerPrompt, EmptyInput) {
  std::vector<StreamHunk> none;
  for (auto m : {LabelerMode::Hunk, LabelerMode::File, LabelerMode::Patch})
    EXPECT_THROW(render_labeler_prompt(ts::prompts(), m, none), EmptyInput);
}

TEST(LabelerPrompt, FileModeRejectsMixedPaths) {
  const auto b = parse_patch(kFourHunks);
  auto stream = build_stream(b);
  EXPECT_THROW(render_labeler_prompt(ts::prompts(), LabelerMode::File, stream),
               std::invalid_argument);
  EXPECT_THROW(render_labeler_prompt(ts::prompts(), LabelerMode::Hunk, stream),
               std::invalid_argument);
}

TEST(RefinerPrompt, TypeLinesAndScope) {
  const auto b = parse_patch(
      "--- a/x.c\n+++ b/x.c\n@@ -1,4 +1,4 @@ void foo(int)\n a\n-b\n+c\n d\n e\n"
      "@@ -20 +20 @@\n-q\n+r\n"
      "@@ -30 +30 @@\n-s\n+t\n"
      "@@ -40 +40 @@\n-u\n+v\n"
      "@@ -50 +50 @@ int main()\n-w\n+z\n");
  auto stream = build_stream(b);
  std::vector<RefinerStreamEntry> entries{
      {stream[0], {{1000, 1, LabelType::Rename}}},
      {stream[4], {{5000, 5, LabelType::Testing}, {5001, 5, LabelType::LogicChange}}},
      {stream[2], {{3000, 3, std::nullopt}}},
  };
  const auto req = render_refiner_prompt(ts::prompts(), entries);
  EXPECT_EQ(req.kind, TemplateKind::Refiner);
  EXPECT_NE(req.text.find("Type: LOGIC_CHANGE, ID: 5001"), std::string::npos);
  EXPECT_NE(req.text.find("Type: NONE, ID: 3000"), std::string::npos);
  EXPECT_NE(req.text.find("Diff hunk number 1 in scope void foo(int):"), std::string::npos);
  EXPECT_NE(req.text.find("Diff hunk number 3 in scope :"), std::string::npos);
  EXPECT_EQ(req.text.find("Diff hunk number 2 "), std::string::npos);
  EXPECT_EQ(req.covered_hunks, (std::vector<std::uint32_t>{1, 5, 3}));
  EXPECT_EQ(req.covered_labels.size(), 4u);
}

TEST(RefinerPrompt, EmptyInput) {
  std::vector<RefinerStreamEntry> none;
  EXPECT_THROW(render_refiner_prompt(ts::prompts(), none), EmptyInput);
}

TEST(PromptTemplate, PlaceholderSetEnforced) {
  EXPECT_THROW(PromptTemplate::parse(TemplateKind::Refiner, "{label_types}"), TemplateError);
  std::string skel;
  for (const auto& p : PromptTemplate::required_placeholders(TemplateKind::LabelerHunk))
    skel += "{" + p + "}\n";
  const auto t = PromptTemplate::parse(TemplateKind::LabelerHunk, skel + "{Not} {} {x-y} {\"k\": 1}");
  EXPECT_EQ(t.placeholders(), PromptTemplate::required_placeholders(TemplateKind::LabelerHunk));
  EXPECT_THROW(PromptTemplate::parse(TemplateKind::LabelerHunk, skel + "{extra}"), TemplateError);
  EXPECT_THROW(t.render({}), TemplateError);
}

TEST(PromptTemplate, SubstitutionIsSinglePass) {
  std::string skel;
  std::map<std::string, std::string> values;
  for (const auto& p : PromptTemplate::required_placeholders(TemplateKind::LabelerHunk)) {
    skel += "{" + p + "}|";
    values[p] = "{label_types}";
  }
  const auto t = PromptTemplate::parse(TemplateKind::LabelerHunk, skel);
  const std::string out = t.render(values);
  EXPECT_EQ(count_of(out, "{label_types}"), values.size());
}

TEST(PromptLibrary, MissingDirectory) {
  EXPECT_THROW(PromptLibrary::load(ts::scratch_dir("noprompts")), TemplateError);
}

TEST(PromptLibrary, ExtraExamplesAppended) {
  PromptLibrary lib = ts::prompts();
  lib.extra_examples.push_back("EXTRA EXAMPLE");
  EXPECT_TRUE(lib.examples_text().ends_with("\n\nEXTRA EXAMPLE"));
  const auto b = parse_patch(kFourHunks);
  EXPECT_NE(labeler_requests(b, LabelerMode::Patch, lib)[0].text.find("EXTRA EXAMPLE"),
            std::string::npos);
}

TEST(LabelTypes, OneLinePerType) {
  const std::string s = render_label_types();
  EXPECT_EQ(count_of(s, "label_name: "), kLabelTypeCount);
  EXPECT_TRUE(s.starts_with("label_name: documentation, description: "));
}

TEST(EstimateTokens, Examples) {
  EXPECT_EQ(estimate_tokens(""), 0u);
  EXPECT_EQ(estimate_tokens("12345678"), 2u);
  EXPECT_EQ(estimate_tokens("123456789"), 3u);
  const std::string g = golden("labeler_patch.txt");
  EXPECT_EQ(estimate_tokens(g), (g.size() + 3) / 4);
}
