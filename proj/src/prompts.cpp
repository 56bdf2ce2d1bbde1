#include "booststep/prompts.hpp"

#include <cctype>

#include "booststep/text_util.hpp"

namespace booststep::prompts {

const std::string_view kZeroShotInstruction =
    "You are a professional math problem solver. Solve the problem step by step and output the "
    "final answer within \\boxed{}.";

const std::string_view kFewShotInstruction =
    "You are a professional math problem solver.  Solve the problem step by step and output the "
    "final answer within \\boxed{}. In case you don't know how to solve it, I will give you "
    "example problems with their full solutions which you can refer to.";

const std::string_view kFirstTryInstruction =
    "You are a professional math problem solver. I will give you a math problem and part of its "
    "solution. And you need to only output the next step of the solution, starting with 'Step "
    "i:', where i is the step number. If you think that the final step is derived, put the "
    "answer within \\boxed{}.";

const std::string_view kStepGuidedInstruction =
    "You are a professional math problem solver. I will give you a math problem and part of its "
    "solution. And you need to only output the next step of the solution, starting with 'Step "
    "i:', where i is the step number. In case you don't know how to derive the correct content, "
    "an example with 'Key Step' will be given. You need to learn how 'Key Step' is derived, and "
    "implement similar strategy in your derivation procedure. If you think that the final step "
    "is derived, put the answer within \\boxed{}.";

const std::string_view kSegmentationInstruction =
    "You are a professional math problem solver. I will give you a math problem and its complete "
    "solution. Split the solution into steps, where each step is a complete and simple "
    "inference. Keep the original wording and mathematical content. Output every step on its own "
    "line, starting with 'Step k:', where k is the step number.";

const std::string_view kPairwiseInstruction =
    "You are a professional math teacher. I will give you a math problem and two candidate "
    "partial solutions, FIRST and SECOND. Decide which candidate's latest step is more likely to "
    "be correct and to lead to the correct final answer. A reference example from a correct "
    "solution, with its 'Key Step' marked, may be given for a candidate; use it to check how a "
    "similar step is derived. Briefly explain your judgement, then end your reply with a final "
    "line containing only FIRST or SECOND.";

const std::string_view kJudgeInstruction =
    "You are a strict math grader. I will give you a predicted final answer and the ground truth "
    "answer of a math problem. Judge whether they are mathematically equivalent, ignoring "
    "differences in formatting. Reply with only YES or NO.";

const std::string_view kPairwiseFormatReminder =
    "End your reply with a final line containing only FIRST or SECOND.";

const std::string_view kJudgeFormatReminder = "Reply with only YES or NO.";

namespace {

std::vector<ChatMessage> make(std::string_view instruction, std::string user) {
  return {{Role::system, std::string(instruction)}, {Role::user, std::move(user)}};
}

std::string problem_and_prior(const std::string& statement,
                              const std::vector<std::string>& prior_steps) {
  std::string out = "Problem: " + statement;
  if (!prior_steps.empty()) out += "\nSolution:\n" + render_steps(prior_steps);
  return out;
}

}  // namespace

std::string render_steps(const std::vector<std::string>& steps) {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) out += '\n';
    out += "Step " + std::to_string(i + 1) + ": " + steps[i];
  }
  return out;
}

std::string render_guidance(const StepGuidance& g) {
  std::string out = "Example Problem: " + g.statement + "\nExample Solution: ";
  std::size_t i = 0;
  for (; i < g.preceding_steps.size(); ++i) {
    out += "Step" + std::to_string(i + 1) + ": " + g.preceding_steps[i] + "\n";
  }
  out += "Step" + std::to_string(i + 1) + "(Key Step): " + g.key_step;
  return out;
}

std::vector<ChatMessage> zero_shot(const std::string& statement) {
  return make(kZeroShotInstruction, "Problem: " + statement);
}

std::vector<ChatMessage> few_shot(const std::string& statement,
                                  const std::vector<ShotExample>& examples) {
  std::string user;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    user += "Example " + std::to_string(i + 1) + ":\nProblem: " + examples[i].statement +
            "\nSolution: " + join(examples[i].steps, "\n") + "\n\n";
  }
  user += "Problem: " + statement;
  return make(kFewShotInstruction, std::move(user));
}

std::vector<ChatMessage> first_try(const std::string& statement,
                                   const std::vector<std::string>& prior_steps) {
  return make(kFirstTryInstruction, problem_and_prior(statement, prior_steps));
}

std::vector<ChatMessage> step_guided(const std::string& statement,
                                     const std::vector<std::string>& prior_steps,
                                     const StepGuidance& guidance) {
  return make(kStepGuidedInstruction,
              render_guidance(guidance) + "\n\n" + problem_and_prior(statement, prior_steps));
}

std::vector<ChatMessage> segmentation(const std::string& statement, const std::string& solution) {
  return make(kSegmentationInstruction, "Problem: " + statement + "\nSolution: " + solution);
}

std::vector<ChatMessage> pairwise(const std::string& statement,
                                  const std::vector<std::string>& first,
                                  const std::vector<std::string>& second,
                                  const std::optional<StepGuidance>& first_reference,
                                  const std::optional<StepGuidance>& second_reference) {
  std::string user = "Problem: " + statement + "\n\nCandidate FIRST:\n" + render_steps(first) +
                     "\n\nCandidate SECOND:\n" + render_steps(second);
  if (first_reference)
    user += "\n\nReference for Candidate FIRST:\n" + render_guidance(*first_reference);
  if (second_reference)
    user += "\n\nReference for Candidate SECOND:\n" + render_guidance(*second_reference);
  return make(kPairwiseInstruction, std::move(user));
}

std::vector<ChatMessage> judge_equivalence(const std::string& predicted,
                                           const std::string& ground_truth) {
  return make(kJudgeInstruction,
              "Predicted answer: " + predicted + "\nGround truth answer: " + ground_truth);
}

StepPrefix strip_step_prefix(std::string_view text) {
  StepPrefix out;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto skip_stars = [&] {
    while (i < text.size() && text[i] == '*') ++i;
  };
  skip_ws();
  skip_stars();
  skip_ws();
  if (!starts_with_icase(text.substr(i), "step")) {
    out.body = trim(text);
    return out;
  }
  i += 4;
  skip_ws();
  std::size_t digits = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == digits || i - digits > 6) {
    out.body = trim(text);
    return out;
  }
  int number = std::stoi(std::string(text.substr(digits, i - digits)));
  skip_ws();
  if (starts_with_icase(text.substr(i), "(key step)")) {
    i += 10;
    skip_ws();
  }
  skip_stars();
  skip_ws();
  if (i >= text.size() || text[i] != ':') {
    out.body = trim(text);
    return out;
  }
  ++i;
  skip_stars();
  out.matched = true;
  out.number = number;
  out.body = trim(text.substr(i));
  return out;
}

}  // namespace booststep::prompts
