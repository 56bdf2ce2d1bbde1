#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "booststep/model_client.hpp"

// Prompt templates. Instruction text goes in the system message, the
// problem (and any examples) in the user message.
namespace booststep::prompts {

extern const std::string_view kZeroShotInstruction;
extern const std::string_view kFewShotInstruction;
extern const std::string_view kFirstTryInstruction;
extern const std::string_view kStepGuidedInstruction;
extern const std::string_view kSegmentationInstruction;
extern const std::string_view kPairwiseInstruction;
extern const std::string_view kJudgeInstruction;

extern const std::string_view kPairwiseFormatReminder;
extern const std::string_view kJudgeFormatReminder;

struct ShotExample {
  std::string statement;
  std::vector<std::string> steps;
};

// A retrieved example: its problem, the steps before the key step, and the key step.
struct StepGuidance {
  std::string statement;
  std::vector<std::string> preceding_steps;
  std::string key_step;
};

// "Step 1: a\nStep 2: b"
std::string render_steps(const std::vector<std::string>& steps);

// "Example Problem: ...\nExample Solution: Step1: ...\nStepj(Key Step): ..."
std::string render_guidance(const StepGuidance& guidance);

std::vector<ChatMessage> zero_shot(const std::string& statement);
std::vector<ChatMessage> few_shot(const std::string& statement,
                                  const std::vector<ShotExample>& examples);
std::vector<ChatMessage> first_try(const std::string& statement,
                                   const std::vector<std::string>& prior_steps);
std::vector<ChatMessage> step_guided(const std::string& statement,
                                     const std::vector<std::string>& prior_steps,
                                     const StepGuidance& guidance);
std::vector<ChatMessage> segmentation(const std::string& statement, const std::string& solution);
std::vector<ChatMessage> pairwise(const std::string& statement,
                                  const std::vector<std::string>& first,
                                  const std::vector<std::string>& second,
                                  const std::optional<StepGuidance>& first_reference,
                                  const std::optional<StepGuidance>& second_reference);
std::vector<ChatMessage> judge_equivalence(const std::string& predicted,
                                           const std::string& ground_truth);

struct StepPrefix {
  bool matched = false;
  int number = 0;
  std::string body;
};

// Accepts "Step <n>:" case-insensitively, with optional ** bold markers around
// the label and an optional "(Key Step)" tag. Unmatched text is returned trimmed.
StepPrefix strip_step_prefix(std::string_view text);

}  // namespace booststep::prompts
