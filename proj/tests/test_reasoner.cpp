#include <gtest/gtest.h>

#include <random>

#include "booststep/reasoner.hpp"
#include "support/boxed_cases.hpp"
#include "support/scenarios.hpp"

using namespace booststep;

TEST(ExtractBoxed, LabeledCorpus) {
  auto cases = boxed::corpus();
  EXPECT_GE(cases.size(), 40u);
  for (const auto& c : cases) EXPECT_EQ(extract_boxed(c.text), c.want) << c.text;
}

TEST(ExtractBoxed, RenderedContentRoundTrips) {
  std::mt19937 rng(17);
  const std::vector<std::string> atoms{"x", "1", "\\frac", "+", " ", "\\{", "\\}", "^", "\\sqrt", "(", ")"};
  std::function<std::string(int)> gen = [&](int depth) {
    std::string s;
    int parts = rng() % 4;
    for (int i = 0; i < parts; ++i) {
      if (depth < 5 && rng() % 3 == 0) {
        s += "{" + gen(depth + 1) + "}";
      } else {
        s += atoms[rng() % atoms.size()];
      }
    }
    return s;
  };
  for (int i = 0; i < 500; ++i) {
    auto content = gen(1);
    auto text = "Step 4: so the answer is $\\boxed{" + content + "}$.";
    EXPECT_EQ(extract_boxed(text), content) << text;
  }
}

TEST(FirstTry, StripsPrefixAndFlagsDeviation) {
  ScriptedClient c;
  c.add_contains("Problem: A", {"Step 1: do a thing"});
  c.add_contains("Problem: B", {"do a thing without label"});
  ReasonerConfig cfg;
  auto a = first_try({"a", "A"}, {}, c, cfg);
  EXPECT_EQ(a.text, "do a thing");
  EXPECT_FALSE(a.format_deviation);
  auto b = first_try({"b", "B"}, {}, c, cfg);
  EXPECT_EQ(b.text, "do a thing without label");
  EXPECT_TRUE(b.format_deviation);
  auto call = c.calls().front();
  EXPECT_EQ(call.model_name, "gpt-4o");
  EXPECT_EQ(call.temperature, 0.0);
}

TEST(RetrievalQuery, EachKey) {
  Problem p{"p", "Q"};
  EXPECT_EQ(retrieval_query(RetrievalKey::first_try, p, {"a", "b"}, "try"), "try");
  EXPECT_EQ(retrieval_query(RetrievalKey::path, p, {"a", "b"}, "try"), "Q\na\nb");
  EXPECT_EQ(retrieval_query(RetrievalKey::pre_step, p, {"a", "b"}, "try"), "b");
  EXPECT_EQ(retrieval_query(RetrievalKey::pre_step, p, {}, "try"), "Q");
  EXPECT_EQ(retrieval_query(RetrievalKey::path, p, {}, "try"), "Q");
}

TEST(StepLevel, GuidanceCorrectsTheTangentFormula) {
  auto bank = scenario::tangent_bank();
  StepRetriever retriever(bank);
  CallbackClient model(scenario::tangent_model);
  auto trace = solve_step_level(scenario::kTangentProblem, retriever, model, ReasonerConfig{});
  ASSERT_EQ(trace.steps.size(), 3u);
  EXPECT_FALSE(trace.steps[0].guided);
  EXPECT_TRUE(trace.steps[1].guided);
  EXPECT_FALSE(trace.steps[2].guided);
  EXPECT_EQ(trace.steps[1].first_try_text, scenario::kWrongStep2);
  EXPECT_EQ(trace.steps[1].final_text, scenario::kRightStep2);
  ASSERT_TRUE(trace.steps[1].retrieved);
  EXPECT_EQ(trace.steps[1].retrieved->ref.problem_id, "tan75");
  EXPECT_EQ(trace.steps[1].retrieved->ref.step_index, 1u);
  EXPECT_GE(trace.steps[1].retrieved->ref.similarity, 0.7);
  EXPECT_EQ(trace.terminal_answer, scenario::kTangentAnswer);
  EXPECT_EQ(trace.termination, Termination::boxed_answer);
  EXPECT_EQ(trace.stats.calls, 4u);
  EXPECT_TRUE(trace.warnings.empty());
}

TEST(StepLevel, ThresholdAboveOneDisablesGuidance) {
  auto bank = scenario::tangent_bank();
  StepRetriever retriever(bank);
  CallbackClient model(scenario::tangent_model);
  ReasonerConfig cfg;
  cfg.rejection_threshold = 1.01;
  auto trace = solve_step_level(scenario::kTangentProblem, retriever, model, cfg);
  ASSERT_EQ(trace.steps.size(), 3u);
  for (const auto& s : trace.steps) {
    EXPECT_FALSE(s.guided);
    EXPECT_TRUE(s.retrieval_attempted);
    EXPECT_EQ(s.final_text, s.first_try_text);
  }
  EXPECT_EQ(trace.terminal_answer, "\\frac{5}{6}");
  EXPECT_EQ(trace.stats.calls, 3u);
}

TEST(StepLevel, MaxStepsStopsTheLoop) {
  auto bank = scenario::tangent_bank();
  StepRetriever retriever(bank);
  CallbackClient model(scenario::tangent_model);
  ReasonerConfig cfg;
  cfg.max_steps = 1;
  auto trace = solve_step_level(scenario::kTangentProblem, retriever, model, cfg);
  EXPECT_EQ(trace.steps.size(), 1u);
  EXPECT_EQ(trace.termination, Termination::max_steps);
  EXPECT_FALSE(trace.terminal_answer);
}

TEST(StepLevel, ModelErrorKeepsAcceptedSteps) {
  auto bank = scenario::tangent_bank();
  StepRetriever retriever(bank);
  int calls = 0;
  CallbackClient model([&](const ChatRequest& r) -> std::string {
    if (++calls == 2) throw ApiError(500, "boom");
    return scenario::tangent_model(r);
  });
  auto trace = solve_step_level(scenario::kTangentProblem, retriever, model, ReasonerConfig{});
  EXPECT_EQ(trace.termination, Termination::model_error);
  EXPECT_EQ(trace.steps.size(), 1u);
  EXPECT_FALSE(trace.error.empty());
}

TEST(StepLevel, FormatDeviationIsRecordedNotFatal) {
  ExampleBank bank({{"e", "q", {"unrelated words"}, std::nullopt}});
  StepRetriever retriever(bank);
  CallbackClient model([](const ChatRequest&) { return std::string("just \\boxed{3}"); });
  auto trace = solve_step_level({"p", "P"}, retriever, model, ReasonerConfig{});
  ASSERT_EQ(trace.steps.size(), 1u);
  EXPECT_TRUE(trace.steps[0].format_deviation);
  EXPECT_EQ(trace.terminal_answer, "3");
  EXPECT_EQ(trace.warnings.size(), 1u);
}

TEST(StepLevel, PathKeyQueriesStatementAndPriorSteps) {
  auto bank = scenario::tangent_bank();
  StepRetriever retriever(bank);
  CallbackClient model(scenario::tangent_model);
  ReasonerConfig cfg;
  cfg.retrieval_key = RetrievalKey::path;
  cfg.rejection_threshold = 1.01;
  auto trace = solve_step_level(scenario::kTangentProblem, retriever, model, cfg);
  ASSERT_EQ(trace.steps.size(), 3u);
  EXPECT_EQ(trace.steps[0].retrieval_query, scenario::kTangentProblem.statement);
  EXPECT_EQ(trace.steps[2].retrieval_query, scenario::kTangentProblem.statement + "\n" +
                                                scenario::kStep1 + "\n" + scenario::kWrongStep2);
}

TEST(StepLevel, RankOffsetPicksLowerRankedStep) {
  auto bank = scenario::tangent_bank();
  StepRetriever retriever(bank);
  ReasonerConfig cfg;
  cfg.rank_offset = 4;
  cfg.rejection_threshold = 0.0;
  std::vector<std::string> seen_keys;
  CallbackClient model([&](const ChatRequest& r) -> std::string {
    const auto& user = r.messages[1].content;
    if (r.messages[0].content == prompts::kStepGuidedInstruction) {
      auto k = user.find("(Key Step): ");
      seen_keys.push_back(user.substr(k + 12, user.find('\n', k) - k - 12));
    }
    return "Step 1: \\boxed{0}";
  });
  auto trace = solve_step_level({"p", "By the tangent sum formula"}, retriever, model, cfg);
  ASSERT_TRUE(trace.steps[0].retrieved);
  auto ranked = retriever.index().rank_all(trace.steps[0].retrieval_query);
  EXPECT_EQ(trace.steps[0].retrieved->ref.rank, 4u);
  EXPECT_EQ(retriever.records()[ranked[3].doc].step_text, seen_keys.at(0));
}

TEST(ZeroShot, SingleCallWithSyntheticStep) {
  ScriptedClient c;
  c.add_contains("Problem: 1+1", {"It is \\boxed{2}."});
  c.add_contains("Problem: blank", {"I do not know."});
  auto t = solve_zero_shot({"a", "1+1"}, c, ReasonerConfig{});
  EXPECT_EQ(t.mode, "zero_shot");
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.terminal_answer, "2");
  auto u = solve_zero_shot({"b", "blank"}, c, ReasonerConfig{});
  EXPECT_FALSE(u.terminal_answer);
  EXPECT_EQ(u.termination, Termination::max_steps);
  auto v = solve_zero_shot({"c", "missing"}, c, ReasonerConfig{});
  EXPECT_EQ(v.termination, Termination::model_error);
}

TEST(FewShot, FourNearestProblemsInRankOrder) {
  auto bank = scenario::tangent_bank();
  ProblemRetriever retriever(bank);
  ScriptedClient c;
  c.add_contains("Problem:", {"\\boxed{1}"});
  auto t = solve_few_shot(scenario::kTangentProblem, retriever, c, ReasonerConfig{});
  ASSERT_EQ(t.examples.size(), 4u);
  auto ranked = retriever.index().rank_all(scenario::kTangentProblem.statement);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(t.examples[i].rank, i + 1);
    EXPECT_EQ(t.examples[i].problem_id, bank.problems()[ranked[i].doc].id);
  }
  auto user = c.calls().at(0).messages[1].content;
  EXPECT_NE(user.find("Example 4:"), std::string::npos);
  EXPECT_EQ(user.find("Example 5:"), std::string::npos);
  EXPECT_TRUE(t.warnings.empty());
}

TEST(FewShot, RankOffsetExhaustsBankWithWarning) {
  auto bank = scenario::tangent_bank();
  ProblemRetriever retriever(bank);
  ScriptedClient c;
  c.add_contains("Problem:", {"\\boxed{1}"});
  ReasonerConfig cfg;
  cfg.rank_offset = 2;
  auto t = solve_few_shot(scenario::kTangentProblem, retriever, c, cfg);
  ASSERT_EQ(t.examples.size(), 3u);
  EXPECT_EQ(t.examples[0].rank, 2u);
  ASSERT_EQ(t.warnings.size(), 1u);
  cfg.rank_offset = 8;
  auto none = solve_few_shot(scenario::kTangentProblem, retriever, c, cfg);
  EXPECT_TRUE(none.examples.empty());
  EXPECT_EQ(none.terminal_answer, "1");
}

TEST(Enums, StringRoundTrips) {
  for (auto k : {RetrievalKey::first_try, RetrievalKey::path, RetrievalKey::pre_step})
    EXPECT_EQ(retrieval_key_from_string(to_string(k)), k);
  for (auto t : {Termination::boxed_answer, Termination::max_steps, Termination::model_error})
    EXPECT_EQ(termination_from_string(to_string(t)), t);
  EXPECT_THROW(retrieval_key_from_string("nope"), std::invalid_argument);
}
