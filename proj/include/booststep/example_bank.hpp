#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace booststep {

class ModelClient;

struct ExampleProblem {
  std::string id;
  std::string statement;
  std::vector<std::string> steps;
  std::optional<std::string> final_answer;
};

// One retrievable unit: a step together with its problem and everything before it.
struct StepRecord {
  std::string problem_id;
  std::size_t problem_index = 0;
  std::size_t step_index = 0;
  std::string statement;
  std::string step_text;
  std::vector<std::string> preceding_steps;
};

class BankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validated, immutable collection of solved problems.
class ExampleBank {
 public:
  ExampleBank() = default;
  // Throws BankError on duplicate ids or a problem violating the step invariants.
  explicit ExampleBank(std::vector<ExampleProblem> problems);

  const std::vector<ExampleProblem>& problems() const { return problems_; }
  std::size_t size() const { return problems_.size(); }
  bool empty() const { return problems_.empty(); }
  std::size_t total_steps() const;
  const ExampleProblem* find(const std::string& id) const;

 private:
  std::vector<ExampleProblem> problems_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

enum class SegmentationKind { grammatical, content_based };

struct SegmentationStrategy {
  SegmentationKind kind = SegmentationKind::grammatical;
  std::string delimiter = ".";
  ModelClient* segmenter = nullptr;
  std::string segmenter_model;

  static SegmentationStrategy grammatical(std::string delimiter = ".");
  static SegmentationStrategy content_based(ModelClient& segmenter, std::string model);
};

struct Segmentation {
  std::vector<std::string> steps;
  bool fell_back = false;
  std::string fallback_reason;
};

// Splits on the delimiter, trims each fragment and drops empty ones.
std::vector<std::string> segment_grammatical(std::string_view solution,
                                             std::string_view delimiter);

// Parses "Step k: ..." numbered replies. Continuation lines join the current
// step. Returns nullopt unless numbering runs 1..n without gaps.
std::optional<std::vector<std::string>> parse_numbered_steps(std::string_view reply);

// Throws std::invalid_argument if the solution is blank.
Segmentation segment_solution(const std::string& statement, const std::string& solution,
                              const SegmentationStrategy& strategy);

struct RawRecord {
  std::size_t line = 0;
  std::optional<std::string> id;
  std::string statement;
  std::optional<std::vector<std::string>> steps;
  std::optional<std::string> solution;
  std::optional<std::string> final_answer;
};

struct IngestIssue {
  std::size_t line = 0;
  std::string id;
  std::string reason;
};

struct IngestionReport {
  std::size_t records = 0;
  std::size_t problems = 0;
  std::size_t steps = 0;
  std::size_t segmented = 0;
  std::vector<IngestIssue> fallbacks;
  std::vector<IngestIssue> rejects;
};

struct IngestResult {
  ExampleBank bank;
  IngestionReport report;
};

// Reads line-delimited records. Accepts the bank layout
// {id, statement, steps | solution, final_answer}, the aliases problem/question
// for statement and answer for final_answer, and PRM800K labeling records.
// Lines that fail to parse land in report.rejects.
std::vector<RawRecord> parse_raw_records(std::istream& in, IngestionReport& report);

// Throws BankError when nothing survives or ids collide.
IngestResult ingest_bank(const std::vector<RawRecord>& records,
                         const SegmentationStrategy& strategy,
                         IngestionReport report = {});

std::vector<StepRecord> flatten_steps(const ExampleBank& bank);

void write_bank(std::ostream& out, const ExampleBank& bank);
std::string report_to_json(const IngestionReport& report);

// Loads a bank file written by write_bank. Any malformed line is fatal.
ExampleBank load_bank(const std::string& path);

}  // namespace booststep
