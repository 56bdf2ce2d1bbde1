#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "booststep/model_client.hpp"

namespace booststep {

enum class Verdict { correct, incorrect, no_answer };
enum class GradeMethod { judge_model, normalized_match };

const char* to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);
const char* to_string(GradeMethod m);
GradeMethod grade_method_from_string(const std::string& s);

struct GradeResult {
  std::optional<std::string> predicted;
  std::string ground_truth;
  Verdict verdict = Verdict::no_answer;
  GradeMethod method = GradeMethod::normalized_match;
  std::optional<std::string> judge_raw;
  bool judge_fallback = false;

  bool correct() const { return verdict == Verdict::correct; }
};

struct GraderConfig {
  std::string judge_model = "gpt-4o-mini";
};

/// Deterministic answer canonicalization for the offline fallback.
///
/// Rules, applied until nothing changes:
///  - trim surrounding whitespace and "$" delimiters;
///  - drop \left and \right, unwrap \text{..}, \textbf{..}, \mathrm{..}, \mbox{..};
///  - drop trailing periods;
///  - collapse whitespace runs to one space;
///  - lowercase alphabetic words of two or more letters (units, words).
std::string normalize_answer(std::string_view text);

// With a judge client: one yes/no call, retried once on an unparseable reply,
// then falls back to normalized match with judge_fallback set.
// Without one: normalized exact match.
GradeResult judge_equivalence(const std::string& predicted, const std::string& ground_truth,
                              ModelClient* judge, const GraderConfig& config);

// Short-circuits to no_answer when nothing was extracted.
GradeResult grade_answer(const std::optional<std::string>& predicted,
                         const std::string& ground_truth, ModelClient* judge,
                         const GraderConfig& config);

// YES / NO parse of a judge reply.
std::optional<bool> parse_judge_verdict(std::string_view reply);

}  // namespace booststep
