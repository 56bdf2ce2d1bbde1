// Command-line front end: bank build, run, grade, compare.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "booststep/example_bank.hpp"
#include "booststep/harness.hpp"
#include "booststep/text_util.hpp"

using namespace booststep;
using nlohmann::json;

namespace {

RunConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  try {
    return config_from_json(json::parse(read_file(path)));
  } catch (const std::exception& e) {
    throw StartupError("bad config " + path + ": " + e.what());
  }
}

int bank_build(const std::string& input, const std::string& strategy, const std::string& output,
               const std::string& delimiter, const std::string& config_path) {
  std::ifstream in(input);
  if (!in) throw StartupError("cannot open " + input);
  IngestionReport report;
  auto records = parse_raw_records(in, report);

  std::unique_ptr<ClientFactory> factory;
  SegmentationStrategy seg = SegmentationStrategy::grammatical(delimiter);
  if (strategy == "content") {
    auto cfg = load_config(config_path);
    factory = std::make_unique<ClientFactory>(cfg.models, false);
    seg = SegmentationStrategy::content_based(*factory->segmenter(), cfg.models.segmenter);
    seg.delimiter = delimiter;
  }
  IngestResult result;
  try {
    result = ingest_bank(records, seg, report);
  } catch (const BankError& e) {
    throw StartupError(e.what());
  }
  std::ostringstream bank;
  write_bank(bank, result.bank);
  write_file_atomic(output, bank.str());
  auto report_json = report_to_json(result.report);
  write_file_atomic(output + ".report.json", report_json + "\n");
  std::cout << "wrote " << result.report.problems << " problems / " << result.report.steps
            << " steps to " << output << " (" << result.report.fallbacks.size()
            << " fallbacks, " << result.report.rejects.size() << " rejects)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Step-level in-context learning engine for math reasoning"};
  app.require_subcommand(1);

  auto* bank_cmd = app.add_subcommand("bank", "Example bank tools");
  bank_cmd->require_subcommand(1);
  auto* build_cmd = bank_cmd->add_subcommand("build", "Segment a solved-problem corpus into a bank");
  std::string input, output, strategy = "grammatical", delimiter = ".", bank_config;
  build_cmd->add_option("--input", input, "Line-delimited solved problems")->required();
  build_cmd->add_option("--output", output, "Bank file to write")->required();
  build_cmd->add_option("--strategy", strategy, "content or grammatical")
      ->check(CLI::IsMember({"content", "grammatical"}));
  build_cmd->add_option("--delimiter", delimiter, "Grammatical delimiter (also the fallback)");
  build_cmd->add_option("--config", bank_config, "Run config supplying the segmenter model");

  auto* run_cmd = app.add_subcommand("run", "Solve a benchmark in one mode");
  std::string mode, bank_path, bench_path, config_path, output_dir;
  bool resume = false;
  run_cmd->add_option("--mode", mode, "zero_shot, few_shot, booststep or tree_search")
      ->check(CLI::IsMember({"zero_shot", "few_shot", "booststep", "tree_search"}));
  run_cmd->add_option("--bank", bank_path, "Example bank file");
  run_cmd->add_option("--benchmark", bench_path, "Benchmark file");
  run_cmd->add_option("--config", config_path, "Run config (JSON)");
  run_cmd->add_option("--output-dir", output_dir, "Where results go");
  run_cmd->add_flag("--resume", resume, "Continue an interrupted run");

  auto* grade_cmd = app.add_subcommand("grade", "Re-grade stored traces");
  std::string results, grade_config, grade_output;
  bool normalized_only = false;
  grade_cmd->add_option("--results", results, "results.jsonl of a run")->required();
  grade_cmd->add_option("--config", grade_config, "Config supplying the judge model");
  grade_cmd->add_option("--output", grade_output, "Write the regraded summary here");
  grade_cmd->add_flag("--normalized", normalized_only, "Skip the judge model");

  auto* compare_cmd = app.add_subcommand("compare", "Per-item flips between two runs");
  std::string run_a, run_b;
  compare_cmd->add_option("a", run_a, "Baseline results.jsonl")->required();
  compare_cmd->add_option("b", run_b, "Candidate results.jsonl")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build_cmd) return bank_build(input, strategy, output, delimiter, bank_config);

    if (*run_cmd) {
      auto cfg = load_config(config_path);
      if (!mode.empty()) cfg.mode = mode_from_string(mode);
      if (!bank_path.empty()) cfg.bank_path = bank_path;
      if (!bench_path.empty()) cfg.benchmark_path = bench_path;
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      cfg.resume = cfg.resume || resume;
      if (cfg.benchmark_path.empty()) throw StartupError("--benchmark is required");
      ClientFactory factory(cfg.models, cfg.grading == "judge_model");
      auto report = run(cfg, factory.clients());
      std::cout << summary_table(report);
      return 0;
    }

    if (*grade_cmd) {
      auto report = load_results(results);
      RunConfig cfg = grade_config.empty() ? config_from_json(report.config) : load_config(grade_config);
      std::unique_ptr<ClientFactory> factory;
      ModelClient* judge = nullptr;
      if (!normalized_only) {
        factory = std::make_unique<ClientFactory>(cfg.models, true);
        judge = factory->clients().judge;
      }
      auto graded = regrade(report, judge, GraderConfig{cfg.models.judge});
      if (!grade_output.empty())
        write_file_atomic(grade_output, summary_to_json(graded).dump(2) + "\n");
      std::cout << summary_table(graded);
      return 0;
    }

    if (*compare_cmd) {
      auto a = load_results(run_a);
      auto b = load_results(run_b);
      std::cout << delta_table(compare_runs(a, b));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
