#include "booststep/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "booststep/example_bank.hpp"
#include "booststep/retrieval.hpp"
#include "booststep/text_util.hpp"
#include "booststep/tree_search.hpp"

namespace booststep {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Mode m) {
  switch (m) {
    case Mode::zero_shot: return "zero_shot";
    case Mode::few_shot: return "few_shot";
    case Mode::booststep: return "booststep";
    case Mode::tree_search: return "tree_search";
  }
  return "booststep";
}

Mode mode_from_string(const std::string& s) {
  if (s == "zero_shot") return Mode::zero_shot;
  if (s == "few_shot") return Mode::few_shot;
  if (s == "booststep") return Mode::booststep;
  if (s == "tree_search") return Mode::tree_search;
  throw std::invalid_argument("unknown mode: " + s);
}

// ---------------------------------------------------------------------------
// Config

json config_to_json(const RunConfig& c) {
  json models = {{"endpoint", c.models.endpoint},   {"reasoner", c.models.reasoner},
                 {"judge", c.models.judge},         {"segmenter", c.models.segmenter},
                 {"pprm", c.models.pprm},           {"scripted_fixtures", c.models.scripted_fixtures},
                 {"cache_dir", c.models.cache_dir},
                 {"max_tokens", c.models.max_tokens ? json(*c.models.max_tokens) : json(nullptr)}};
  return {{"mode", to_string(c.mode)},
          {"retrieval_key", to_string(c.retrieval_key)},
          {"rank_offset", c.rank_offset},
          {"rejection_threshold", c.rejection_threshold},
          {"shot_count", c.shot_count},
          {"bank_path", c.bank_path},
          {"benchmark_path", c.benchmark_path},
          {"models", std::move(models)},
          {"reason_temperature", c.reason_temperature},
          {"sample_temperature", c.sample_temperature},
          {"max_steps", c.max_steps},
          {"max_depth", c.max_depth},
          {"beam_width", c.beam_width},
          {"children_per_level", c.children_per_level},
          {"reason_icl", c.reason_icl},
          {"verify_icl", c.verify_icl},
          {"grading", c.grading},
          {"concurrency", c.concurrency},
          {"output_dir", c.output_dir},
          {"seed", c.seed}};
}

namespace {

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  std::set<std::string> k(known.begin(), known.end());
  for (const auto& [key, _] : j.items()) {
    if (!k.count(key)) throw std::invalid_argument("unknown " + where + " key: " + key);
  }
}

}  // namespace

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  reject_unknown(j,
                 {"mode", "retrieval_key", "rank_offset", "rejection_threshold", "shot_count",
                  "bank_path", "benchmark_path", "models", "reason_temperature",
                  "sample_temperature", "max_steps", "max_depth", "beam_width",
                  "children_per_level", "reason_icl", "verify_icl", "grading", "concurrency",
                  "output_dir", "seed", "resume"},
                 "config");
  RunConfig c;
  if (j.contains("mode")) c.mode = mode_from_string(j["mode"].get<std::string>());
  if (j.contains("retrieval_key"))
    c.retrieval_key = retrieval_key_from_string(j["retrieval_key"].get<std::string>());
  read_opt(j, "rank_offset", c.rank_offset);
  read_opt(j, "rejection_threshold", c.rejection_threshold);
  read_opt(j, "shot_count", c.shot_count);
  read_opt(j, "bank_path", c.bank_path);
  read_opt(j, "benchmark_path", c.benchmark_path);
  read_opt(j, "reason_temperature", c.reason_temperature);
  read_opt(j, "sample_temperature", c.sample_temperature);
  read_opt(j, "max_steps", c.max_steps);
  read_opt(j, "max_depth", c.max_depth);
  read_opt(j, "beam_width", c.beam_width);
  read_opt(j, "children_per_level", c.children_per_level);
  read_opt(j, "reason_icl", c.reason_icl);
  read_opt(j, "verify_icl", c.verify_icl);
  read_opt(j, "grading", c.grading);
  read_opt(j, "concurrency", c.concurrency);
  read_opt(j, "output_dir", c.output_dir);
  read_opt(j, "seed", c.seed);
  read_opt(j, "resume", c.resume);
  if (auto m = j.find("models"); m != j.end()) {
    reject_unknown(*m,
                   {"endpoint", "reasoner", "judge", "segmenter", "pprm", "scripted_fixtures",
                    "cache_dir", "max_tokens"},
                   "models");
    read_opt(*m, "endpoint", c.models.endpoint);
    read_opt(*m, "reasoner", c.models.reasoner);
    read_opt(*m, "judge", c.models.judge);
    read_opt(*m, "segmenter", c.models.segmenter);
    read_opt(*m, "pprm", c.models.pprm);
    read_opt(*m, "scripted_fixtures", c.models.scripted_fixtures);
    read_opt(*m, "cache_dir", c.models.cache_dir);
    if (m->contains("max_tokens") && !(*m)["max_tokens"].is_null())
      c.models.max_tokens = (*m)["max_tokens"].get<int>();
  }
  if (c.grading != "judge_model" && c.grading != "normalized_match")
    throw std::invalid_argument("grading must be judge_model or normalized_match");
  if (c.rank_offset < 1) throw std::invalid_argument("rank_offset must be >= 1");
  if (c.concurrency < 1) throw std::invalid_argument("concurrency must be >= 1");
  return c;
}

// ---------------------------------------------------------------------------
// Benchmarks

std::vector<BenchmarkItem> load_benchmark(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StartupError("cannot open benchmark file: " + path);
  std::vector<BenchmarkItem> items;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw StartupError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    auto str = [&](std::initializer_list<const char*> keys) -> std::optional<std::string> {
      for (const char* k : keys) {
        if (auto it = j.find(k); it != j.end()) {
          if (it->is_string()) return it->get<std::string>();
          if (it->is_number()) return it->dump();
        }
      }
      return std::nullopt;
    };
    BenchmarkItem item;
    item.id = str({"id", "unique_id"}).value_or("item-" + std::to_string(lineno));
    auto statement = str({"statement", "problem", "question"});
    auto answer = str({"answer", "ground_truth", "final_answer"});
    if (!statement || !answer)
      throw StartupError(path + ":" + std::to_string(lineno) + ": needs statement and answer");
    item.statement = *statement;
    item.answer = *answer;
    item.source = str({"source"});
    if (!ids.insert(item.id).second)
      throw StartupError(path + ": duplicate benchmark id " + item.id);
    items.push_back(std::move(item));
  }
  return items;
}

// ---------------------------------------------------------------------------
// Trace / grade serialization

namespace {

json ref_to_json(const ExampleRef& r) {
  return {{"problem_id", r.problem_id},
          {"step_index", r.step_index ? json(*r.step_index) : json(nullptr)},
          {"similarity", r.similarity},
          {"rank", r.rank}};
}

ExampleRef ref_from_json(const json& j) {
  ExampleRef r;
  r.problem_id = j.at("problem_id").get<std::string>();
  if (!j.at("step_index").is_null()) r.step_index = j["step_index"].get<std::size_t>();
  r.similarity = j.at("similarity").get<double>();
  r.rank = j.at("rank").get<std::size_t>();
  return r;
}

}  // namespace

json trace_to_json(const ReasoningTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json js = {{"index", s.index},
               {"first_try_text", s.first_try_text},
               {"format_deviation", s.format_deviation},
               {"retrieval_query", s.retrieval_query},
               {"retrieval_attempted", s.retrieval_attempted},
               {"final_text", s.final_text},
               {"guided", s.guided},
               {"retrieved", nullptr}};
    if (s.retrieved) {
      js["retrieved"] = {{"ref", ref_to_json(s.retrieved->ref)},
                         {"statement", s.retrieved->guidance.statement},
                         {"preceding_steps", s.retrieved->guidance.preceding_steps},
                         {"key_step", s.retrieved->guidance.key_step}};
    }
    steps.push_back(std::move(js));
  }
  json examples = json::array();
  for (const auto& e : t.examples) examples.push_back(ref_to_json(e));
  return {{"problem", {{"id", t.problem.id}, {"statement", t.problem.statement}}},
          {"mode", t.mode},
          {"steps", std::move(steps)},
          {"examples", std::move(examples)},
          {"terminal_answer", t.terminal_answer ? json(*t.terminal_answer) : json(nullptr)},
          {"termination", to_string(t.termination)},
          {"error", t.error},
          {"warnings", t.warnings},
          {"stats",
           {{"calls", t.stats.calls},
            {"cache_hits", t.stats.cache_hits},
            {"prompt_tokens", t.stats.prompt_tokens},
            {"completion_tokens", t.stats.completion_tokens}}}};
}

ReasoningTrace trace_from_json(const json& j) {
  ReasoningTrace t;
  t.problem.id = j.at("problem").at("id").get<std::string>();
  t.problem.statement = j.at("problem").at("statement").get<std::string>();
  t.mode = j.at("mode").get<std::string>();
  for (const auto& js : j.at("steps")) {
    StepOutcome s;
    s.index = js.at("index").get<int>();
    s.first_try_text = js.at("first_try_text").get<std::string>();
    s.format_deviation = js.at("format_deviation").get<bool>();
    s.retrieval_query = js.at("retrieval_query").get<std::string>();
    s.retrieval_attempted = js.at("retrieval_attempted").get<bool>();
    s.final_text = js.at("final_text").get<std::string>();
    s.guided = js.at("guided").get<bool>();
    if (!js.at("retrieved").is_null()) {
      const auto& r = js["retrieved"];
      s.retrieved = RetrievedGuidance{ref_from_json(r.at("ref")),
                                      {r.at("statement").get<std::string>(),
                                       r.at("preceding_steps").get<std::vector<std::string>>(),
                                       r.at("key_step").get<std::string>()}};
    }
    t.steps.push_back(std::move(s));
  }
  for (const auto& e : j.at("examples")) t.examples.push_back(ref_from_json(e));
  if (!j.at("terminal_answer").is_null()) t.terminal_answer = j["terminal_answer"].get<std::string>();
  t.termination = termination_from_string(j.at("termination").get<std::string>());
  t.error = j.at("error").get<std::string>();
  t.warnings = j.at("warnings").get<std::vector<std::string>>();
  const auto& st = j.at("stats");
  t.stats.calls = st.at("calls").get<std::size_t>();
  t.stats.cache_hits = st.at("cache_hits").get<std::size_t>();
  t.stats.prompt_tokens = st.at("prompt_tokens").get<std::int64_t>();
  t.stats.completion_tokens = st.at("completion_tokens").get<std::int64_t>();
  return t;
}

json grade_to_json(const GradeResult& g) {
  return {{"predicted", g.predicted ? json(*g.predicted) : json(nullptr)},
          {"ground_truth", g.ground_truth},
          {"verdict", to_string(g.verdict)},
          {"method", to_string(g.method)},
          {"judge_raw", g.judge_raw ? json(*g.judge_raw) : json(nullptr)},
          {"judge_fallback", g.judge_fallback}};
}

GradeResult grade_from_json(const json& j) {
  GradeResult g;
  if (!j.at("predicted").is_null()) g.predicted = j["predicted"].get<std::string>();
  g.ground_truth = j.at("ground_truth").get<std::string>();
  g.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  g.method = grade_method_from_string(j.at("method").get<std::string>());
  if (!j.at("judge_raw").is_null()) g.judge_raw = j["judge_raw"].get<std::string>();
  g.judge_fallback = j.at("judge_fallback").get<bool>();
  return g;
}

// ---------------------------------------------------------------------------
// Clients

ClientFactory::ClientFactory(const ModelSettings& settings, bool need_judge)
    : need_judge_(need_judge) {
  if (!settings.scripted_fixtures.empty()) {
    try {
      base_ = ScriptedClient::from_file(settings.scripted_fixtures);
    } catch (const std::exception& e) {
      throw StartupError(std::string("cannot load scripted fixtures: ") + e.what());
    }
  } else if (!settings.endpoint.empty()) {
    auto cfg = HttpClientConfig::from_env(settings.endpoint);
    if (cfg.api_key.empty())
      throw StartupError("live mode needs BOOSTSTEP_API_KEY (or OPENAI_API_KEY) to be set");
    try {
      base_ = std::make_unique<HttpChatClient>(std::move(cfg));
    } catch (const std::exception& e) {
      throw StartupError(e.what());
    }
  } else {
    throw StartupError("configure either models.endpoint or models.scripted_fixtures");
  }
  if (!settings.cache_dir.empty())
    cached_ = std::make_unique<CachingClient>(*base_, settings.cache_dir);
}

ModelClient* ClientFactory::segmenter() const { return cached_ ? cached_.get() : base_.get(); }

ClientSet ClientFactory::clients() const {
  ModelClient* c = segmenter();
  return {c, need_judge_ ? c : nullptr, c};
}

// ---------------------------------------------------------------------------
// Run

namespace {

json item_line(const ItemResult& r) {
  json j = {{"type", "item"}, {"id", r.id}, {"trace", trace_to_json(r.trace)},
            {"grade", grade_to_json(r.grade)}};
  if (!r.search_log.is_null()) j["search_log"] = r.search_log;
  return j;
}

ItemResult item_from_line(const json& j) {
  ItemResult r;
  r.id = j.at("id").get<std::string>();
  r.trace = trace_from_json(j.at("trace"));
  r.grade = grade_from_json(j.at("grade"));
  if (j.contains("search_log")) r.search_log = j["search_log"];
  return r;
}

struct Resources {
  std::optional<ExampleBank> bank;
  std::unique_ptr<StepRetriever> steps;
  std::unique_ptr<ProblemRetriever> problems;
};

ItemResult run_item(const BenchmarkItem& item, const RunConfig& config, const ClientSet& clients,
                    const Resources& res) {
  ItemResult out;
  out.id = item.id;
  Problem problem{item.id, item.statement};
  ReasonerConfig rc;
  rc.model = config.models.reasoner;
  rc.temperature = config.reason_temperature;
  rc.max_tokens = config.models.max_tokens;
  rc.max_steps = config.max_steps;
  rc.rejection_threshold = config.rejection_threshold;
  rc.retrieval_key = config.retrieval_key;
  rc.rank_offset = config.rank_offset;
  rc.shot_count = config.shot_count;
  try {
    switch (config.mode) {
      case Mode::zero_shot:
        out.trace = solve_zero_shot(problem, *clients.reasoner, rc);
        break;
      case Mode::few_shot:
        out.trace = solve_few_shot(problem, *res.problems, *clients.reasoner, rc);
        break;
      case Mode::booststep:
        out.trace = solve_step_level(problem, *res.steps, *clients.reasoner, rc);
        break;
      case Mode::tree_search: {
        SearchConfig sc;
        sc.beam_width = config.beam_width;
        sc.children_per_level = config.children_per_level;
        sc.reason_icl = config.reason_icl;
        sc.verify_icl = config.verify_icl;
        sc.sample_temperature = config.sample_temperature;
        sc.max_depth = config.max_depth;
        sc.rejection_threshold = config.rejection_threshold;
        sc.reason_model = config.models.reasoner;
        sc.pprm_model = config.models.pprm;
        sc.max_tokens = config.models.max_tokens;
        ModelClient& judge = clients.pprm ? *clients.pprm : *clients.reasoner;
        auto r = search(problem, *res.steps, sc, {*clients.reasoner, judge});
        out.trace = std::move(r.trace);
        out.search_log = r.log.events;
        break;
      }
    }
  } catch (const std::exception& e) {
    out.trace = ReasoningTrace{};
    out.trace.problem = problem;
    out.trace.mode = to_string(config.mode);
    out.trace.termination = Termination::model_error;
    out.trace.error = e.what();
  }
  GraderConfig gc{config.models.judge};
  ModelClient* judge = config.grading == "judge_model" ? clients.judge : nullptr;
  std::optional<std::string> predicted;
  if (out.trace.termination != Termination::model_error) predicted = out.trace.terminal_answer;
  out.grade = grade_answer(predicted, item.answer, judge, gc);
  return out;
}

}  // namespace

RunReport run(const RunConfig& config, const ClientSet& clients) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!clients.reasoner) throw StartupError("no reasoner client");
  auto items = load_benchmark(config.benchmark_path);

  Resources res;
  if (config.mode != Mode::zero_shot) {
    if (config.bank_path.empty()) throw StartupError("mode needs a bank file");
    try {
      res.bank = load_bank(config.bank_path);
    } catch (const std::exception& e) {
      throw StartupError(e.what());
    }
    if (config.mode == Mode::few_shot) res.problems = std::make_unique<ProblemRetriever>(*res.bank);
    else res.steps = std::make_unique<StepRetriever>(*res.bank);
  }

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  const fs::path results_path = dir / "results.jsonl";
  const json header = {{"type", "header"}, {"format", kResultsFormat},
                       {"config", config_to_json(config)}};

  std::set<std::string> wanted;
  for (const auto& it : items) wanted.insert(it.id);
  std::map<std::string, std::string> done;
  if (fs::exists(results_path)) {
    if (!config.resume)
      throw StartupError(results_path.string() + " exists; pass --resume or pick another output dir");
    std::ifstream in(results_path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error&) {
        continue;  // torn write from an interrupted run
      }
      if (first) {
        first = false;
        if (j.value("type", "") != "header" || j.value("format", "") != kResultsFormat ||
            j.value("config", json()) != header["config"])
          throw StartupError("cannot resume: existing results were produced by a different config");
        continue;
      }
      if (j.value("type", "") != "item") continue;
      auto id = j.value("id", "");
      if (wanted.count(id)) done[id] = j.dump();
    }
  }

  {
    std::string contents = header.dump() + "\n";
    for (const auto& [id, line] : done) contents += line + "\n";
    write_file_atomic(results_path.string(), contents);
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!done.count(items[i].id)) pending.push_back(i);
  }
  std::mt19937_64 rng(config.seed);
  std::shuffle(pending.begin(), pending.end(), rng);

  std::mutex out_mu;
  std::ofstream out(results_path, std::ios::app);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const auto& item = items[pending[k]];
      auto line = item_line(run_item(item, config, clients, res)).dump();
      std::lock_guard lock(out_mu);
      out << line << '\n';
      out.flush();
      done[item.id] = std::move(line);
    }
  };
  const std::size_t nthreads = std::min(config.concurrency, std::max<std::size_t>(pending.size(), 1));
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < nthreads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  out.close();

  RunReport report;
  report.config = header["config"];
  std::string contents = header.dump() + "\n";
  for (const auto& item : items) {
    const auto& line = done.at(item.id);
    contents += line + "\n";
    report.items.push_back(item_from_line(json::parse(line)));
  }
  write_file_atomic(results_path.string(), contents);
  report.executed = pending.size();
  compute_aggregates(report);
  write_file_atomic((dir / "summary.json").string(), summary_to_json(report).dump(2) + "\n");
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_file_atomic((dir / "timing.json").string(),
                    json{{"wall_clock_seconds", report.wall_clock_seconds},
                         {"executed", report.executed}}
                            .dump(2) +
                        "\n");
  return report;
}

RunReport load_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StartupError("cannot open results file: " + path);
  RunReport report;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      continue;
    }
    if (first) {
      if (j.value("type", "") != "header" || j.value("format", "") != kResultsFormat)
        throw StartupError(path + " is not a " + std::string(kResultsFormat) + " file");
      report.config = j["config"];
      first = false;
      continue;
    }
    if (j.value("type", "") == "item") report.items.push_back(item_from_line(j));
  }
  if (first) throw StartupError(path + " has no header");
  compute_aggregates(report);
  return report;
}

void compute_aggregates(RunReport& r) {
  r.correct = r.guided_steps = r.retrievals = r.rejections = r.model_errors = 0;
  r.format_deviations = r.judge_fallbacks = r.cache_hits = 0;
  r.prompt_tokens = r.completion_tokens = 0;
  for (const auto& it : r.items) {
    if (it.grade.correct()) ++r.correct;
    if (it.grade.judge_fallback) ++r.judge_fallbacks;
    if (it.trace.termination == Termination::model_error) ++r.model_errors;
    for (const auto& s : it.trace.steps) {
      if (s.guided) ++r.guided_steps;
      if (s.retrieval_attempted) {
        ++r.retrievals;
        if (!s.retrieved) ++r.rejections;
      }
      if (s.format_deviation) ++r.format_deviations;
    }
    r.cache_hits += it.trace.stats.cache_hits;
    r.prompt_tokens += it.trace.stats.prompt_tokens;
    r.completion_tokens += it.trace.stats.completion_tokens;
  }
  r.accuracy = r.items.empty() ? 0.0 : static_cast<double>(r.correct) / r.items.size();
}

json summary_to_json(const RunReport& r) {
  return {{"format", "booststep-summary/1"},
          {"config", r.config},
          {"items", r.items.size()},
          {"correct", r.correct},
          {"accuracy", r.accuracy},
          {"guided_steps", r.guided_steps},
          {"retrievals", r.retrievals},
          {"rejections", r.rejections},
          {"model_errors", r.model_errors},
          {"format_deviations", r.format_deviations},
          {"judge_fallbacks", r.judge_fallbacks},
          {"cache_hits", r.cache_hits},
          {"prompt_tokens", r.prompt_tokens},
          {"completion_tokens", r.completion_tokens}};
}

std::string summary_table(const RunReport& r) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << "mode               " << r.config.value("mode", "?") << "\n"
     << "items              " << r.items.size() << " (" << r.executed << " run now)\n"
     << "correct            " << r.correct << "\n"
     << "accuracy           " << 100.0 * r.accuracy << "%\n"
     << "guided steps       " << r.guided_steps << "\n"
     << "retrievals         " << r.retrievals << " (" << r.rejections << " rejected)\n"
     << "model errors       " << r.model_errors << "\n"
     << "format deviations  " << r.format_deviations << "\n"
     << "judge fallbacks    " << r.judge_fallbacks << "\n"
     << "cache hits         " << r.cache_hits << "\n"
     << "tokens             " << r.prompt_tokens << " prompt / " << r.completion_tokens
     << " completion\n";
  if (r.wall_clock_seconds > 0) ss << "wall clock         " << r.wall_clock_seconds << " s\n";
  return ss.str();
}

RunReport regrade(const RunReport& report, ModelClient* judge, const GraderConfig& config) {
  RunReport out = report;
  for (auto& it : out.items) {
    std::optional<std::string> predicted;
    if (it.trace.termination != Termination::model_error) predicted = it.trace.terminal_answer;
    it.grade = grade_answer(predicted, it.grade.ground_truth, judge, config);
  }
  compute_aggregates(out);
  return out;
}

RunDelta compare_runs(const RunReport& a, const RunReport& b) {
  std::map<std::string, bool> ca;
  std::map<std::string, bool> cb;
  for (const auto& it : a.items) ca[it.id] = it.grade.correct();
  for (const auto& it : b.items) cb[it.id] = it.grade.correct();
  std::vector<std::string> only;
  for (const auto& [id, _] : ca)
    if (!cb.count(id)) only.push_back(id);
  for (const auto& [id, _] : cb)
    if (!ca.count(id)) only.push_back(id);
  if (!only.empty())
    throw std::invalid_argument("benchmark ids differ between runs: " + join(only, ", "));
  RunDelta d;
  d.items = a.items.size();
  d.accuracy_a = a.accuracy;
  d.accuracy_b = b.accuracy;
  d.delta = b.accuracy - a.accuracy;
  for (const auto& it : a.items) {
    bool before = ca[it.id];
    bool after = cb[it.id];
    if (before != after) d.flips.push_back({it.id, before, after});
  }
  return d;
}

std::string delta_table(const RunDelta& d) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << "items     " << d.items << "\n"
     << "accuracy  " << 100.0 * d.accuracy_a << "% -> " << 100.0 * d.accuracy_b << "% ("
     << (d.delta >= 0 ? "+" : "") << 100.0 * d.delta << ")\n";
  if (d.flips.empty()) {
    ss << "no flips\n";
  } else {
    ss << "flips:\n";
    for (const auto& f : d.flips)
      ss << "  " << f.id << "  " << (f.before ? "correct" : "incorrect") << " -> "
         << (f.after ? "correct" : "incorrect") << "\n";
  }
  return ss.str();
}

}  // namespace booststep
