#include "booststep/grader.hpp"

#include <array>
#include <cctype>

#include "booststep/prompts.hpp"
#include "booststep/text_util.hpp"

namespace booststep {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::correct: return "correct";
    case Verdict::incorrect: return "incorrect";
    case Verdict::no_answer: return "no_answer";
  }
  return "no_answer";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "correct") return Verdict::correct;
  if (s == "incorrect") return Verdict::incorrect;
  if (s == "no_answer") return Verdict::no_answer;
  throw std::invalid_argument("unknown verdict: " + s);
}

const char* to_string(GradeMethod m) {
  return m == GradeMethod::judge_model ? "judge_model" : "normalized_match";
}

GradeMethod grade_method_from_string(const std::string& s) {
  if (s == "judge_model") return GradeMethod::judge_model;
  if (s == "normalized_match") return GradeMethod::normalized_match;
  throw std::invalid_argument("unknown grade method: " + s);
}

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Removes a command name not followed by another letter.
std::string drop_command(std::string s, std::string_view cmd) {
  std::size_t pos = 0;
  while ((pos = s.find(cmd, pos)) != std::string::npos) {
    std::size_t end = pos + cmd.size();
    if (end < s.size() && is_alpha(s[end])) {
      pos = end;
      continue;
    }
    s.erase(pos, cmd.size());
  }
  return s;
}

// Replaces "\cmd{inner}" with "inner" wherever the braces balance.
std::string unwrap_command(std::string s, std::string_view cmd) {
  std::string open = std::string(cmd) + "{";
  std::size_t pos = 0;
  while ((pos = s.find(open, pos)) != std::string::npos) {
    std::size_t begin = pos + open.size();
    int depth = 1;
    std::size_t i = begin;
    for (; i < s.size(); ++i) {
      if (s[i] == '{') ++depth;
      else if (s[i] == '}' && --depth == 0) break;
    }
    if (i >= s.size()) {
      pos = begin;
      continue;
    }
    s = s.substr(0, pos) + s.substr(begin, i - begin) + s.substr(i + 1);
  }
  return s;
}

std::string normalize_once(std::string s) {
  s = trim(s);
  while (s.size() >= 2 && s.front() == '$' && s.back() == '$') s = trim(s.substr(1, s.size() - 2));
  s = drop_command(std::move(s), "\\left");
  s = drop_command(std::move(s), "\\right");
  for (auto cmd : {"\\textbf", "\\text", "\\mathrm", "\\mbox"}) s = unwrap_command(std::move(s), cmd);
  s = trim(s);
  while (!s.empty() && s.back() == '.') {
    s.pop_back();
    s = trim_right(s);
  }
  std::string collapsed;
  bool in_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !collapsed.empty()) collapsed.push_back(' ');
    in_space = false;
    collapsed.push_back(c);
  }
  for (std::size_t i = 0; i < collapsed.size();) {
    if (!is_alpha(collapsed[i]) || (i > 0 && collapsed[i - 1] == '\\')) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < collapsed.size() && is_alpha(collapsed[j])) ++j;
    if (j - i >= 2 && (i == 0 || collapsed[i - 1] != '\\')) {
      for (std::size_t k = i; k < j; ++k)
        collapsed[k] = static_cast<char>(std::tolower(static_cast<unsigned char>(collapsed[k])));
    }
    i = j;
  }
  return collapsed;
}

GradeResult fallback(const std::string& predicted, const std::string& ground_truth) {
  GradeResult g;
  g.predicted = predicted;
  g.ground_truth = ground_truth;
  g.method = GradeMethod::normalized_match;
  g.verdict = normalize_answer(predicted) == normalize_answer(ground_truth) ? Verdict::correct
                                                                            : Verdict::incorrect;
  return g;
}

std::string upper_letters(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (is_alpha(c)) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    else if (std::isspace(static_cast<unsigned char>(c))) out.push_back(' ');
  }
  return trim(out);
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string cur(text);
  for (int i = 0; i < 32; ++i) {
    auto next = normalize_once(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

std::optional<bool> parse_judge_verdict(std::string_view reply) {
  auto whole = upper_letters(reply);
  if (whole == "YES") return true;
  if (whole == "NO") return false;
  auto lines = split(reply, "\n");
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    auto l = upper_letters(*it);
    if (l.empty()) continue;
    if (l == "YES" || l.rfind("YES ", 0) == 0) return true;
    if (l == "NO" || l.rfind("NO ", 0) == 0) return false;
    break;
  }
  if (whole.rfind("YES ", 0) == 0) return true;
  if (whole.rfind("NO ", 0) == 0) return false;
  return std::nullopt;
}

GradeResult judge_equivalence(const std::string& predicted, const std::string& ground_truth,
                              ModelClient* judge, const GraderConfig& config) {
  if (!judge) return fallback(predicted, ground_truth);
  ChatRequest req;
  req.messages = prompts::judge_equivalence(predicted, ground_truth);
  req.model_name = config.judge_model;
  req.temperature = 0.0;
  std::string raw;
  try {
    raw = judge->complete(req).content;
    auto verdict = parse_judge_verdict(raw);
    if (!verdict) {
      req.messages.push_back({Role::assistant, raw});
      req.messages.push_back({Role::user, std::string(prompts::kJudgeFormatReminder)});
      raw = judge->complete(req).content;
      verdict = parse_judge_verdict(raw);
    }
    if (verdict) {
      GradeResult g;
      g.predicted = predicted;
      g.ground_truth = ground_truth;
      g.method = GradeMethod::judge_model;
      g.verdict = *verdict ? Verdict::correct : Verdict::incorrect;
      g.judge_raw = raw;
      return g;
    }
  } catch (const ModelError& e) {
    raw = std::string("judge error: ") + e.what();
  }
  auto g = fallback(predicted, ground_truth);
  g.judge_raw = raw;
  g.judge_fallback = true;
  return g;
}

GradeResult grade_answer(const std::optional<std::string>& predicted,
                         const std::string& ground_truth, ModelClient* judge,
                         const GraderConfig& config) {
  if (!predicted) {
    GradeResult g;
    g.ground_truth = ground_truth;
    g.verdict = Verdict::no_answer;
    g.method = judge ? GradeMethod::judge_model : GradeMethod::normalized_match;
    return g;
  }
  return judge_equivalence(*predicted, ground_truth, judge, config);
}

}  // namespace booststep
