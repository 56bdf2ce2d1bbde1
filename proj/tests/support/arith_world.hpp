#pragma once

// Addition problems with a model that slips on sums divisible by three
// unless it has seen a worked step. Replies depend only on the prompt and on
// how often that exact prompt was seen, so runs are deterministic under any
// thread interleaving.

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <string>

#include <nlohmann/json.hpp>

#include "booststep/model_client.hpp"
#include "booststep/prompts.hpp"
#include "support/scenarios.hpp"
#include "support/search_world.hpp"

namespace arith {

using booststep::ChatRequest;

inline std::pair<long, long> operands(const std::string& text) {
  static const std::regex kSum(R"(Compute (\d+) \+ (\d+)\.)");
  std::smatch m;
  auto pos = text.rfind("Problem: Compute");
  std::string tail = pos == std::string::npos ? text : text.substr(pos);
  if (!std::regex_search(tail, m, kSum)) throw booststep::FixtureMissError("no operands");
  return {std::stol(m[1]), std::stol(m[2])};
}

inline bool slips(long a, long b) { return (a + b) % 3 == 0; }

class Model {
 public:
  std::string operator()(const ChatRequest& req) {
    namespace p = booststep::prompts;
    const auto& sys = req.messages.at(0).content;
    const auto& user = req.messages.at(1).content;
    if (sys == p::kJudgeInstruction) return judge(user);
    if (sys == p::kPairwiseInstruction) return world::judge(req);
    auto [a, b] = operands(user);
    const long right = a + b;
    const long shown = slips(a, b) ? right + 1 : right;
    if (sys == p::kZeroShotInstruction) return "Adding gives \\boxed{" + std::to_string(shown) + "}.";
    if (sys == p::kFewShotInstruction) return "Following the examples, \\boxed{" + std::to_string(right) + "}.";
    const auto n = scenario::count_prior_steps(user);
    std::string variant;
    if (req.temperature > 0) {
      std::lock_guard lock(mu_);
      auto k = seen_[booststep::fingerprint(req)]++;
      if (k) variant = " (variant " + std::to_string(k) + ")";
    }
    if (n == 0) return "Step 1: Add the two numbers." + variant;
    if (sys == p::kStepGuidedInstruction)
      return "Step " + std::to_string(n + 1) + ": The sum is \\boxed{" + std::to_string(right) + "}.";
    return "Step " + std::to_string(n + 1) + ": The sum is \\boxed{" + std::to_string(shown) + "}." +
           variant;
  }

  static std::string judge(const std::string& user) {
    static const std::regex kPair(R"(Predicted answer: (.*)\nGround truth answer: (.*))");
    std::smatch m;
    if (!std::regex_search(user, m, kPair)) return "unsure";
    return m[1].str() == m[2].str() ? "YES" : "NO";
  }

 private:
  std::mutex mu_;
  std::map<std::string, int> seen_;
};

struct Files {
  std::filesystem::path bank;
  std::filesystem::path benchmark;
};

inline Files write_inputs(const std::filesystem::path& dir, int items) {
  std::filesystem::create_directories(dir);
  Files f{dir / "bank.jsonl", dir / "benchmark.jsonl"};
  std::ofstream bank(f.bank);
  for (auto [a, b] : {std::pair{2, 3}, {4, 5}, {10, 11}}) {
    nlohmann::json j = {{"id", "ex" + std::to_string(a)},
                        {"statement", "Compute " + std::to_string(a) + " + " + std::to_string(b) + "."},
                        {"steps",
                         {"Add the two numbers.",
                          "The sum is \\boxed{" + std::to_string(a + b) + "}."}},
                        {"final_answer", std::to_string(a + b)}};
    bank << j.dump() << "\n";
  }
  nlohmann::json unrelated = {{"id", "circle"},
                              {"statement", "Find the area of a circle of radius 3."},
                              {"steps", {"The area of a circle is $\\pi r^2$.", "So \\boxed{9\\pi}."}}};
  bank << unrelated.dump() << "\n";
  std::ofstream bench(f.benchmark);
  for (int i = 0; i < items; ++i) {
    long a = 7 + 3 * i, b = 2 * i + 1;
    nlohmann::json j = {{"id", "q" + std::to_string(i)},
                        {"statement", "Compute " + std::to_string(a) + " + " + std::to_string(b) + "."},
                        {"answer", std::to_string(a + b)}};
    bench << j.dump() << "\n";
  }
  return f;
}

}  // namespace arith
