#include "booststep/example_bank.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "booststep/model_client.hpp"
#include "booststep/prompts.hpp"
#include "booststep/text_util.hpp"

namespace booststep {

using nlohmann::json;

ExampleBank::ExampleBank(std::vector<ExampleProblem> problems) : problems_(std::move(problems)) {
  std::vector<std::string> dups;
  for (std::size_t i = 0; i < problems_.size(); ++i) {
    const auto& p = problems_[i];
    if (p.steps.empty()) throw BankError("problem " + p.id + " has no steps");
    for (const auto& s : p.steps) {
      if (trim(s).empty()) throw BankError("problem " + p.id + " has a blank step");
    }
    if (!by_id_.emplace(p.id, i).second) dups.push_back(p.id);
  }
  if (!dups.empty()) throw BankError("duplicate problem ids: " + join(dups, ", "));
}

std::size_t ExampleBank::total_steps() const {
  std::size_t n = 0;
  for (const auto& p : problems_) n += p.steps.size();
  return n;
}

const ExampleProblem* ExampleBank::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &problems_[it->second];
}

SegmentationStrategy SegmentationStrategy::grammatical(std::string delimiter) {
  SegmentationStrategy s;
  s.kind = SegmentationKind::grammatical;
  s.delimiter = std::move(delimiter);
  return s;
}

SegmentationStrategy SegmentationStrategy::content_based(ModelClient& segmenter,
                                                         std::string model) {
  SegmentationStrategy s;
  s.kind = SegmentationKind::content_based;
  s.segmenter = &segmenter;
  s.segmenter_model = std::move(model);
  return s;
}

std::vector<std::string> segment_grammatical(std::string_view solution,
                                             std::string_view delimiter) {
  std::vector<std::string> out;
  for (auto& piece : split(solution, delimiter)) {
    auto t = trim(piece);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::optional<std::vector<std::string>> parse_numbered_steps(std::string_view reply) {
  std::vector<std::string> steps;
  std::istringstream in{std::string(reply)};
  std::string line;
  while (std::getline(in, line)) {
    auto prefix = prompts::strip_step_prefix(line);
    if (prefix.matched) {
      if (prefix.number != static_cast<int>(steps.size()) + 1) return std::nullopt;
      steps.push_back(prefix.body);
    } else if (!steps.empty()) {
      auto t = trim(line);
      if (t.empty()) continue;
      auto& cur = steps.back();
      if (!cur.empty()) cur.push_back('\n');
      cur += t;
    }
  }
  if (steps.empty()) return std::nullopt;
  for (const auto& s : steps) {
    if (trim(s).empty()) return std::nullopt;
  }
  return steps;
}

Segmentation segment_solution(const std::string& statement, const std::string& solution,
                              const SegmentationStrategy& strategy) {
  if (trim(solution).empty()) throw std::invalid_argument("empty solution");
  Segmentation result;
  auto grammatical = [&] {
    auto steps = segment_grammatical(solution, strategy.delimiter);
    if (steps.empty()) steps.push_back(trim(solution));
    return steps;
  };
  if (strategy.kind == SegmentationKind::grammatical) {
    result.steps = grammatical();
    return result;
  }
  if (!strategy.segmenter) throw std::invalid_argument("content-based strategy without segmenter");

  ChatRequest req;
  req.messages = prompts::segmentation(statement, solution);
  req.model_name = strategy.segmenter_model;
  req.temperature = 0.0;
  try {
    auto resp = strategy.segmenter->complete(req);
    if (auto steps = parse_numbered_steps(resp.content)) {
      result.steps = std::move(*steps);
      return result;
    }
    result.fallback_reason = "segmenter reply not parseable as numbered steps";
  } catch (const ModelError& e) {
    result.fallback_reason = std::string("segmenter error: ") + e.what();
  }
  result.fell_back = true;
  result.steps = grammatical();
  return result;
}

namespace {

std::optional<std::string> string_field(const json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto it = j.find(k);
    if (it != j.end() && it->is_string()) return it->get<std::string>();
  }
  return std::nullopt;
}

// PRM800K labeling record: question.problem plus label.steps[*] where each step
// carries completions and a chosen_completion index (or a human_completion).
std::optional<RawRecord> from_prm800k(const json& j) {
  auto q = j.find("question");
  auto label = j.find("label");
  if (q == j.end() || !q->is_object() || label == j.end() || !label->is_object()) return std::nullopt;
  RawRecord r;
  r.statement = q->value("problem", "");
  if (auto gt = q->find("ground_truth_answer"); gt != q->end() && gt->is_string())
    r.final_answer = gt->get<std::string>();
  std::vector<std::string> steps;
  if (auto ls = label->find("steps"); ls != label->end() && ls->is_array()) {
    for (const auto& step : *ls) {
      const json* chosen = nullptr;
      auto completions = step.find("completions");
      auto idx = step.find("chosen_completion");
      if (idx != step.end() && idx->is_number_integer() && completions != step.end() &&
          completions->is_array()) {
        auto i = idx->get<long long>();
        if (i >= 0 && static_cast<std::size_t>(i) < completions->size()) chosen = &(*completions)[i];
      }
      if (!chosen) {
        if (auto hc = step.find("human_completion"); hc != step.end() && hc->is_object())
          chosen = &*hc;
      }
      if (!chosen && completions != step.end() && completions->is_array()) {
        for (const auto& c : *completions) {
          if (c.value("rating", 0) == 1) {
            chosen = &c;
            break;
          }
        }
      }
      if (chosen && chosen->contains("text") && (*chosen)["text"].is_string())
        steps.push_back((*chosen)["text"].get<std::string>());
    }
  }
  r.steps = std::move(steps);
  return r;
}

}  // namespace

std::vector<RawRecord> parse_raw_records(std::istream& in, IngestionReport& report) {
  std::vector<RawRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++report.records;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      report.rejects.push_back({lineno, "", std::string("invalid JSON: ") + e.what()});
      continue;
    }
    if (!j.is_object()) {
      report.rejects.push_back({lineno, "", "record is not an object"});
      continue;
    }
    RawRecord r;
    if (auto prm = from_prm800k(j)) {
      r = std::move(*prm);
      r.id = "prm800k-" + std::to_string(lineno);
    } else {
      r.id = string_field(j, {"id", "unique_id"});
      r.statement = string_field(j, {"statement", "problem", "question"}).value_or("");
      r.solution = string_field(j, {"solution"});
      r.final_answer = string_field(j, {"final_answer", "answer"});
      if (auto s = j.find("steps"); s != j.end()) {
        if (!s->is_array()) {
          report.rejects.push_back({lineno, r.id.value_or(""), "steps is not an array"});
          continue;
        }
        std::vector<std::string> steps;
        bool ok = true;
        for (const auto& e : *s) {
          if (!e.is_string()) ok = false;
          else steps.push_back(e.get<std::string>());
        }
        if (!ok) {
          report.rejects.push_back({lineno, r.id.value_or(""), "steps must be strings"});
          continue;
        }
        r.steps = std::move(steps);
      }
    }
    r.line = lineno;
    out.push_back(std::move(r));
  }
  return out;
}

IngestResult ingest_bank(const std::vector<RawRecord>& records,
                         const SegmentationStrategy& strategy, IngestionReport report) {
  if (records.empty() && report.records == 0) throw BankError("empty corpus");
  std::vector<ExampleProblem> problems;
  std::set<std::string> seen;
  std::vector<std::string> dups;
  for (const auto& r : records) {
    std::string id = r.id.value_or("p" + std::to_string(r.line));
    if (trim(r.statement).empty()) {
      report.rejects.push_back({r.line, id, "missing statement"});
      continue;
    }
    ExampleProblem p;
    p.id = id;
    p.statement = r.statement;
    p.final_answer = r.final_answer;
    if (r.steps) {
      for (const auto& s : *r.steps) {
        if (!trim(s).empty()) p.steps.push_back(s);
      }
      if (p.steps.empty() && !(r.solution && !trim(*r.solution).empty())) {
        report.rejects.push_back({r.line, id, "no non-blank steps"});
        continue;
      }
    }
    if (p.steps.empty()) {
      if (!r.solution || trim(*r.solution).empty()) {
        report.rejects.push_back({r.line, id, "missing solution"});
        continue;
      }
      auto seg = segment_solution(r.statement, *r.solution, strategy);
      ++report.segmented;
      if (seg.fell_back) report.fallbacks.push_back({r.line, id, seg.fallback_reason});
      p.steps = std::move(seg.steps);
    }
    if (!seen.insert(id).second) dups.push_back(id);
    problems.push_back(std::move(p));
  }
  if (!dups.empty()) throw BankError("duplicate problem ids: " + join(dups, ", "));
  if (problems.empty()) throw BankError("empty corpus: no record survived ingestion");
  report.problems = problems.size();
  report.steps = 0;
  for (const auto& p : problems) report.steps += p.steps.size();
  return {ExampleBank(std::move(problems)), std::move(report)};
}

std::vector<StepRecord> flatten_steps(const ExampleBank& bank) {
  std::vector<StepRecord> out;
  out.reserve(bank.total_steps());
  const auto& problems = bank.problems();
  for (std::size_t pi = 0; pi < problems.size(); ++pi) {
    const auto& p = problems[pi];
    for (std::size_t si = 0; si < p.steps.size(); ++si) {
      StepRecord r;
      r.problem_id = p.id;
      r.problem_index = pi;
      r.step_index = si;
      r.statement = p.statement;
      r.step_text = p.steps[si];
      r.preceding_steps.assign(p.steps.begin(), p.steps.begin() + si);
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_bank(std::ostream& out, const ExampleBank& bank) {
  for (const auto& p : bank.problems()) {
    json j = {{"id", p.id}, {"statement", p.statement}, {"steps", p.steps}};
    if (p.final_answer) j["final_answer"] = *p.final_answer;
    out << j.dump() << '\n';
  }
}

std::string report_to_json(const IngestionReport& report) {
  auto issues = [](const std::vector<IngestIssue>& v) {
    json a = json::array();
    for (const auto& i : v) a.push_back({{"line", i.line}, {"id", i.id}, {"reason", i.reason}});
    return a;
  };
  json j = {{"records", report.records},     {"problems", report.problems},
            {"steps", report.steps},         {"segmented", report.segmented},
            {"fallbacks", issues(report.fallbacks)}, {"rejects", issues(report.rejects)}};
  return j.dump(2);
}

ExampleBank load_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BankError("cannot open bank file: " + path);
  IngestionReport report;
  auto records = parse_raw_records(in, report);
  if (!report.rejects.empty()) {
    const auto& r = report.rejects.front();
    throw BankError(path + ":" + std::to_string(r.line) + ": " + r.reason);
  }
  for (const auto& r : records) {
    if (!r.steps || r.steps->empty())
      throw BankError(path + ":" + std::to_string(r.line) + ": bank records need a steps array");
  }
  auto result = ingest_bank(records, SegmentationStrategy::grammatical(), report);
  if (!result.report.rejects.empty()) {
    const auto& r = result.report.rejects.front();
    throw BankError(path + ":" + std::to_string(r.line) + ": " + r.reason);
  }
  return std::move(result.bank);
}

}  // namespace booststep
