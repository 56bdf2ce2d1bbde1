#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "booststep/model_client.hpp"
#include "booststep/prompts.hpp"
#include "booststep/retrieval.hpp"

namespace booststep {

struct Problem {
  std::string id;
  std::string statement;
};

// What the step-level loop uses as its retrieval query.
enum class RetrievalKey {
  first_try,  // the tentative step itself
  path,       // problem statement followed by every accepted step
  pre_step,   // only the previous accepted step
};

enum class Termination { boxed_answer, max_steps, model_error };

const char* to_string(RetrievalKey key);
RetrievalKey retrieval_key_from_string(const std::string& s);
const char* to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct ReasonerConfig {
  std::string model = "gpt-4o";
  double temperature = 0.0;
  std::optional<int> max_tokens;
  int max_steps = 20;
  double rejection_threshold = 0.7;
  RetrievalKey retrieval_key = RetrievalKey::first_try;
  std::size_t rank_offset = 1;
  std::size_t shot_count = 4;
};

// Provenance of one retrieved example (a step for step-level modes, a whole
// problem for the few-shot baseline, in which case step_index is absent).
struct ExampleRef {
  std::string problem_id;
  std::optional<std::size_t> step_index;
  double similarity = 0.0;
  std::size_t rank = 0;
};

struct RetrievedGuidance {
  ExampleRef ref;
  prompts::StepGuidance guidance;
};

struct StepOutcome {
  int index = 0;  // 1-based
  std::string first_try_text;
  bool format_deviation = false;
  std::string retrieval_query;
  bool retrieval_attempted = false;
  std::optional<RetrievedGuidance> retrieved;
  std::string final_text;
  bool guided = false;
};

struct CallStats {
  std::size_t calls = 0;
  std::size_t cache_hits = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  void record(const ChatResponse& response);
  CallStats& operator+=(const CallStats& other);
};

struct ReasoningTrace {
  Problem problem;
  std::string mode;
  std::vector<StepOutcome> steps;
  std::vector<ExampleRef> examples;  // few-shot baseline only
  std::optional<std::string> terminal_answer;
  Termination termination = Termination::max_steps;
  std::string error;
  std::vector<std::string> warnings;
  CallStats stats;
};

// Contents of the last \boxed{...}, braces matched to any depth.
// nullopt when absent or when the last occurrence never closes.
std::optional<std::string> extract_boxed(std::string_view text);

struct StepAttempt {
  std::string text;
  bool format_deviation = false;
};

// One call with the first-try prompt. ModelError propagates.
StepAttempt first_try(const Problem& problem, const std::vector<std::string>& prior_steps,
                      ModelClient& client, const ReasonerConfig& config,
                      CallStats* stats = nullptr);

// One call with the key-step prompt. ModelError propagates.
StepAttempt guided_step(const Problem& problem, const std::vector<std::string>& prior_steps,
                        const prompts::StepGuidance& guidance, ModelClient& client,
                        const ReasonerConfig& config, CallStats* stats = nullptr);

prompts::StepGuidance guidance_from(const StepRecord& record);

std::string retrieval_query(RetrievalKey key, const Problem& problem,
                            const std::vector<std::string>& prior_steps,
                            const std::string& first_try_text);

ReasoningTrace solve_zero_shot(const Problem& problem, ModelClient& client,
                               const ReasonerConfig& config);

// Rejection is never applied here; rank_offset selects ranks t .. t + shots - 1.
ReasoningTrace solve_few_shot(const Problem& problem, const ProblemRetriever& retriever,
                              ModelClient& client, const ReasonerConfig& config);

// first try -> retrieve with rejection -> guided regeneration, until a boxed
// answer appears or max_steps is reached.
ReasoningTrace solve_step_level(const Problem& problem, const StepRetriever& retriever,
                                ModelClient& client, const ReasonerConfig& config);

}  // namespace booststep
