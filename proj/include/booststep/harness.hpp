#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "booststep/grader.hpp"
#include "booststep/model_client.hpp"
#include "booststep/reasoner.hpp"

namespace booststep {

inline constexpr const char* kResultsFormat = "booststep-results/1";

class StartupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { zero_shot, few_shot, booststep, tree_search };
const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct ModelSettings {
  std::string endpoint;  // chat-completions base URL for live runs
  std::string reasoner = "gpt-4o";
  std::string judge = "gpt-4o-mini";
  std::string segmenter = "gpt-4o";
  std::string pprm = "gpt-4o-mini";
  std::string scripted_fixtures;  // non-empty: replay this fixture file offline
  std::string cache_dir;
  std::optional<int> max_tokens;
};

struct RunConfig {
  Mode mode = Mode::booststep;
  RetrievalKey retrieval_key = RetrievalKey::first_try;
  std::size_t rank_offset = 1;
  double rejection_threshold = 0.7;
  std::size_t shot_count = 4;
  std::string bank_path;
  std::string benchmark_path;
  ModelSettings models;
  double reason_temperature = 0.0;
  double sample_temperature = 0.3;
  int max_steps = 20;
  int max_depth = 20;
  std::size_t beam_width = 2;
  std::size_t children_per_level = 4;
  bool reason_icl = true;
  bool verify_icl = true;
  std::string grading = "judge_model";  // or "normalized_match"
  std::size_t concurrency = 4;
  std::string output_dir = "runs/latest";
  std::uint64_t seed = 0;
  bool resume = false;  // invocation flag, not written to result headers
};

nlohmann::json config_to_json(const RunConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);

struct BenchmarkItem {
  std::string id;
  std::string statement;
  std::string answer;
  std::optional<std::string> source;
};

// Line-delimited {id, statement, answer, source}; also accepts MATH-style
// {problem, answer, unique_id} and {question, answer}. Missing ids become "item-<line>".
std::vector<BenchmarkItem> load_benchmark(const std::string& path);

nlohmann::json trace_to_json(const ReasoningTrace& trace);
ReasoningTrace trace_from_json(const nlohmann::json& j);
nlohmann::json grade_to_json(const GradeResult& grade);
GradeResult grade_from_json(const nlohmann::json& j);

struct ItemResult {
  std::string id;
  ReasoningTrace trace;
  GradeResult grade;
  nlohmann::json search_log;  // tree_search only, else null
};

struct RunReport {
  nlohmann::json config;
  std::vector<ItemResult> items;
  std::size_t executed = 0;  // items run by this invocation
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::size_t guided_steps = 0;
  std::size_t retrievals = 0;
  std::size_t rejections = 0;
  std::size_t model_errors = 0;
  std::size_t format_deviations = 0;
  std::size_t judge_fallbacks = 0;
  std::size_t cache_hits = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double wall_clock_seconds = 0.0;
};

// Clients a run needs; any pointer may alias another.
struct ClientSet {
  ModelClient* reasoner = nullptr;
  ModelClient* judge = nullptr;  // null -> normalized match grading
  ModelClient* pprm = nullptr;
};

// Owns the clients described by ModelSettings (scripted or live, optionally cached).
class ClientFactory {
 public:
  explicit ClientFactory(const ModelSettings& settings, bool need_judge);
  ClientSet clients() const;
  ModelClient* segmenter() const;

 private:
  std::unique_ptr<ModelClient> base_;
  std::unique_ptr<ModelClient> cached_;
  bool need_judge_;
};

// Runs every pending item, persisting each result as it completes, then
// rewrites results.jsonl in benchmark order and writes summary.json.
// Throws StartupError for unreadable inputs or a resume/config mismatch.
RunReport run(const RunConfig& config, const ClientSet& clients);

// Reads a results file (header + items). Truncated trailing lines are skipped.
RunReport load_results(const std::string& path);

void compute_aggregates(RunReport& report);
nlohmann::json summary_to_json(const RunReport& report);
std::string summary_table(const RunReport& report);

// Re-grades stored traces without touching the file.
RunReport regrade(const RunReport& report, ModelClient* judge, const GraderConfig& config);

struct Flip {
  std::string id;
  bool before = false;
  bool after = false;
};

struct RunDelta {
  std::size_t items = 0;
  double accuracy_a = 0.0;
  double accuracy_b = 0.0;
  double delta = 0.0;
  std::vector<Flip> flips;
};

// Throws std::invalid_argument listing the symmetric difference on id mismatch.
RunDelta compare_runs(const RunReport& a, const RunReport& b);
std::string delta_table(const RunDelta& delta);

}  // namespace booststep
