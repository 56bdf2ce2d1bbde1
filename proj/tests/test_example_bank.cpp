#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "booststep/example_bank.hpp"
#include "booststep/model_client.hpp"

using namespace booststep;

namespace {

std::vector<RawRecord> parse(const std::string& jsonl, IngestionReport& report) {
  std::istringstream in(jsonl);
  return parse_raw_records(in, report);
}

}  // namespace

TEST(Grammatical, SplitsOnPeriods) {
  EXPECT_EQ(segment_grammatical("First, factor. Then, solve.", "."),
            (std::vector<std::string>{"First, factor", "Then, solve"}));
  EXPECT_EQ(segment_grammatical("a. b. c.", "."), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(segment_grammatical("one\n\ntwo", "\n\n"), (std::vector<std::string>{"one", "two"}));
}

TEST(Grammatical, NoDelimiterGivesOneStep) {
  auto seg = segment_solution("q", "x equals four", SegmentationStrategy::grammatical("."));
  EXPECT_EQ(seg.steps, std::vector<std::string>{"x equals four"});
  EXPECT_FALSE(seg.fell_back);
}

TEST(Grammatical, ConcatenationReconstructsInput) {
  const std::string sol = "Let x = 2. Then y = 3.  So x + y = 5.";
  auto steps = segment_grammatical(sol, ".");
  std::string joined;
  for (const auto& s : steps) joined += s + ".";
  auto squash = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
    return s;
  };
  EXPECT_EQ(squash(joined), squash(sol));
}

TEST(Segmentation, BlankSolutionIsInvalid) {
  EXPECT_THROW(segment_solution("q", "   ", SegmentationStrategy::grammatical()),
               std::invalid_argument);
}

TEST(ParseNumberedSteps, ContiguousNumbering) {
  EXPECT_EQ(*parse_numbered_steps("Step 1: x\nStep 2: y"), (std::vector<std::string>{"x", "y"}));
  auto cont = parse_numbered_steps("Step 1: a\nmore of a\nStep 2: b");
  ASSERT_TRUE(cont);
  EXPECT_EQ((*cont)[0], "a\nmore of a");
  EXPECT_FALSE(parse_numbered_steps("Step 1: a\nStep 3: c"));
  EXPECT_FALSE(parse_numbered_steps("no steps here"));
  EXPECT_FALSE(parse_numbered_steps(""));
}

TEST(ContentBased, UsesSegmenterReply) {
  ScriptedClient seg;
  seg.add_contains("Solution: Expand. Collect terms. Solve.",
                   {"Step 1: Expand.\nStep 2: Collect terms.\nStep 3: Solve."});
  auto s = segment_solution("Find x.", "Expand. Collect terms. Solve.",
                            SegmentationStrategy::content_based(seg, "seg-model"));
  EXPECT_EQ(s.steps, (std::vector<std::string>{"Expand.", "Collect terms.", "Solve."}));
  EXPECT_FALSE(s.fell_back);
  auto calls = seg.calls();
  ASSERT_EQ(calls.size(), 1u);
  EXPECT_EQ(calls[0].model_name, "seg-model");
  EXPECT_EQ(calls[0].temperature, 0.0);
}

TEST(ContentBased, UnparseableReplyFallsBackToGrammatical) {
  ScriptedClient seg;
  seg.add_contains("Problem:", {"I cannot do that"});
  auto s = segment_solution("q", "a. b.", SegmentationStrategy::content_based(seg, "m"));
  EXPECT_TRUE(s.fell_back);
  EXPECT_EQ(s.steps, (std::vector<std::string>{"a", "b"}));
  EXPECT_FALSE(s.fallback_reason.empty());
}

TEST(ContentBased, ModelErrorFallsBack) {
  ScriptedClient seg;
  ScriptedClient::Rule r;
  r.contains = "Problem:";
  r.replies = {ScriptedClient::Reply::transport_failure()};
  seg.add_rule(r);
  auto s = segment_solution("q", "a. b.", SegmentationStrategy::content_based(seg, "m"));
  EXPECT_TRUE(s.fell_back);
  EXPECT_EQ(s.steps.size(), 2u);
}

TEST(ExampleBank, RejectsDuplicatesAndEmptySteps) {
  EXPECT_THROW(ExampleBank({{"a", "q", {"s"}, std::nullopt}, {"a", "q2", {"t"}, std::nullopt}}),
               BankError);
  EXPECT_THROW(ExampleBank({{"a", "q", {}, std::nullopt}}), BankError);
  EXPECT_THROW(ExampleBank({{"a", "q", {"x", "  "}, std::nullopt}}), BankError);
}

TEST(ExampleBank, FlattenCountsAndPrefixes) {
  ExampleBank bank({{"a", "qa", {"a1", "a2", "a3"}, "1"}, {"b", "qb", {"b1"}, std::nullopt}});
  auto recs = flatten_steps(bank);
  ASSERT_EQ(recs.size(), bank.total_steps());
  ASSERT_EQ(recs.size(), 4u);
  for (const auto& r : recs) {
    const auto* p = bank.find(r.problem_id);
    ASSERT_NE(p, nullptr);
    EXPECT_EQ(r.step_text, p->steps[r.step_index]);
    EXPECT_EQ(r.preceding_steps,
              std::vector<std::string>(p->steps.begin(), p->steps.begin() + r.step_index));
    EXPECT_EQ(r.statement, p->statement);
  }
  EXPECT_EQ(recs[3].problem_index, 1u);
}

TEST(Ingest, PassesThroughPresegmentedSteps) {
  IngestionReport report;
  auto recs = parse(R"({"id":"x","statement":"q","steps":["s1","s2"],"final_answer":"3"})"
                    "\n",
                    report);
  auto res = ingest_bank(recs, SegmentationStrategy::grammatical(), report);
  ASSERT_EQ(res.bank.size(), 1u);
  EXPECT_EQ(res.bank.problems()[0].steps, (std::vector<std::string>{"s1", "s2"}));
  EXPECT_EQ(res.report.segmented, 0u);
  EXPECT_EQ(res.bank.problems()[0].final_answer, "3");
}

TEST(Ingest, AliasesMissingIdsAndRejects) {
  IngestionReport report;
  auto recs = parse("{\"problem\":\"p\",\"solution\":\"a. b.\",\"answer\":\"1\"}\n"
                    "not json\n"
                    "{\"id\":\"nosol\",\"statement\":\"q\"}\n"
                    "{\"id\":\"nostate\",\"solution\":\"x.\"}\n",
                    report);
  auto res = ingest_bank(recs, SegmentationStrategy::grammatical(), report);
  ASSERT_EQ(res.bank.size(), 1u);
  EXPECT_EQ(res.bank.problems()[0].id, "p1");
  EXPECT_EQ(res.report.records, 4u);
  EXPECT_EQ(res.report.rejects.size(), 3u);
  EXPECT_EQ(res.report.segmented, 1u);
  EXPECT_EQ(res.report.steps, 2u);
}

TEST(Ingest, DuplicateIdsAreFatal) {
  IngestionReport report;
  auto recs = parse("{\"id\":\"d\",\"statement\":\"q\",\"steps\":[\"s\"]}\n"
                    "{\"id\":\"d\",\"statement\":\"r\",\"steps\":[\"t\"]}\n",
                    report);
  try {
    ingest_bank(recs, SegmentationStrategy::grammatical(), report);
    FAIL() << "expected BankError";
  } catch (const BankError& e) {
    EXPECT_NE(std::string(e.what()).find("d"), std::string::npos);
  }
}

TEST(Ingest, EmptyCorpusIsFatal) {
  IngestionReport report;
  auto recs = parse("", report);
  EXPECT_THROW(ingest_bank(recs, SegmentationStrategy::grammatical(), report), BankError);
  IngestionReport r2;
  auto bad = parse("{\"id\":\"x\"}\n", r2);
  EXPECT_THROW(ingest_bank(bad, SegmentationStrategy::grammatical(), r2), BankError);
}

TEST(Ingest, Prm800kChosenCompletion) {
  const std::string line =
      R"({"question":{"problem":"What is 1+1?","ground_truth_answer":"2"},)"
      R"("label":{"steps":[{"completions":[{"text":"Add them.","rating":1}],"human_completion":null,"chosen_completion":0},)"
      R"({"completions":[{"text":"Wrong.","rating":-1},{"text":"So \\boxed{2}.","rating":1}],"human_completion":null,"chosen_completion":1}]}})";
  IngestionReport report;
  auto recs = parse(line + "\n", report);
  auto res = ingest_bank(recs, SegmentationStrategy::grammatical(), report);
  ASSERT_EQ(res.bank.size(), 1u);
  const auto& p = res.bank.problems()[0];
  EXPECT_EQ(p.id, "prm800k-1");
  EXPECT_EQ(p.statement, "What is 1+1?");
  EXPECT_EQ(p.steps, (std::vector<std::string>{"Add them.", "So \\boxed{2}."}));
}

TEST(Ingest, DeterministicAcrossRuns) {
  const std::string corpus =
      "{\"id\":\"a\",\"statement\":\"q\",\"solution\":\"x. y. z.\"}\n"
      "{\"id\":\"b\",\"statement\":\"r\",\"steps\":[\"s\"]}\n";
  auto once = [&] {
    IngestionReport rep;
    auto recs = parse(corpus, rep);
    auto res = ingest_bank(recs, SegmentationStrategy::grammatical(), rep);
    std::ostringstream out;
    write_bank(out, res.bank);
    return out.str() + report_to_json(res.report);
  };
  EXPECT_EQ(once(), once());
}

TEST(BankFile, WriteThenLoadRoundTrips) {
  ExampleBank bank({{"a", "q \"quoted\"", {"s1", "\\frac{1}{2}"}, "1/2"},
                    {"b", "r", {"t"}, std::nullopt}});
  auto path = std::filesystem::temp_directory_path() / "booststep_bank_roundtrip.jsonl";
  {
    std::ofstream out(path);
    write_bank(out, bank);
  }
  auto back = load_bank(path.string());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.problems()[0].statement, "q \"quoted\"");
  EXPECT_EQ(back.problems()[0].steps[1], "\\frac{1}{2}");
  EXPECT_EQ(back.problems()[0].final_answer, "1/2");
  EXPECT_FALSE(back.problems()[1].final_answer);
  std::filesystem::remove(path);
  EXPECT_THROW(load_bank("/nonexistent/bank.jsonl"), BankError);
}
