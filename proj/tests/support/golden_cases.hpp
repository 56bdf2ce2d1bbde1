#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "booststep/prompts.hpp"

namespace golden {

inline std::string read(const std::string& name) {
  std::ifstream in(std::string(BOOSTSTEP_TEST_DIR) + "/golden/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

inline const std::string kStatement = "What is the value of $\\tan 75^\\circ$?";

inline std::vector<booststep::prompts::ShotExample> four_shots() {
  return {
      {"Compute $\\tan 15^\\circ$.",
       {"Write $15^\\circ = 45^\\circ - 30^\\circ$.", "Apply the tangent difference formula.",
        "The answer is \\boxed{2-\\sqrt{3}}."}},
      {"Compute $\\sin 75^\\circ$.",
       {"Use the sine sum formula.", "The answer is \\boxed{\\frac{\\sqrt{6}+\\sqrt{2}}{4}}."}},
      {"What is $2+2$?", {"\\boxed{4}"}},
      {"Factor $x^2-1$.",
       {"Difference of squares.", "So $(x-1)(x+1)$, i.e. \\boxed{(x-1)(x+1)}."}},
  };
}

inline booststep::prompts::StepGuidance tan15_guidance() {
  return {"Compute $\\tan 15^\\circ$.", {"Write $15^\\circ = 45^\\circ - 30^\\circ$."},
          "Apply the tangent difference formula."};
}

struct Case {
  std::string file;
  std::vector<booststep::ChatMessage> messages;
};

inline std::vector<Case> all_cases() {
  namespace p = booststep::prompts;
  const std::vector<std::string> prior{"Write $75^\\circ = 45^\\circ + 30^\\circ$.",
                                       "We need $\\tan 45^\\circ$ and $\\tan 30^\\circ$."};
  return {
      {"zero_shot.txt", p::zero_shot(kStatement)},
      {"few_shot_4.txt", p::few_shot(kStatement, four_shots())},
      {"first_try_empty.txt", p::first_try(kStatement, {})},
      {"first_try_prior.txt", p::first_try(kStatement, prior)},
      {"step_guided.txt", p::step_guided(kStatement, {prior[0]}, tan15_guidance())},
      {"segmentation.txt",
       p::segmentation("Compute $\\tan 15^\\circ$.",
                       "Write $15^\\circ = 45^\\circ - 30^\\circ$. Apply the tangent difference "
                       "formula. The answer is $2-\\sqrt{3}$.")},
  };
}

}  // namespace golden
