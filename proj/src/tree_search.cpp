#include "booststep/tree_search.hpp"

#include <algorithm>
#include <numeric>

#include "booststep/prompts.hpp"
#include "booststep/text_util.hpp"

namespace booststep {

using nlohmann::json;

void SearchConfig::validate() const {
  if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
  if (children_per_level < beam_width)
    throw std::invalid_argument("children_per_level must be >= beam_width");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (!(sample_temperature >= 0.0)) throw std::invalid_argument("sample_temperature must be >= 0");
}

const char* to_string(Winner w) { return w == Winner::first ? "first" : "second"; }

SearchTree::SearchTree() { nodes_.push_back(SearchNode{}); }

std::size_t SearchTree::add_child(std::size_t parent, StepOutcome outcome, bool terminal) {
  const auto& p = nodes_.at(parent);
  SearchNode n;
  n.id = nodes_.size();
  n.parent = parent;
  n.depth = p.depth + 1;
  n.trace_prefix = p.trace_prefix;
  n.trace_prefix.push_back(outcome.final_text);
  n.terminal = terminal;
  n.outcome = std::move(outcome);
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

namespace {

ReasonerConfig reasoner_config(const SearchConfig& c) {
  ReasonerConfig rc;
  rc.model = c.reason_model;
  rc.temperature = c.sample_temperature;
  rc.max_tokens = c.max_tokens;
  rc.rejection_threshold = c.rejection_threshold;
  rc.max_steps = c.max_depth;
  return rc;
}

json ref_json(const ExampleRef& r) {
  json j = {{"problem_id", r.problem_id}, {"similarity", r.similarity}, {"rank", r.rank}};
  if (r.step_index) j["step_index"] = *r.step_index;
  return j;
}

std::optional<Winner> parse_winner(std::string_view reply) {
  auto lines = split(reply, "\n");
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    std::string letters;
    for (char c : *it) {
      if (std::isalpha(static_cast<unsigned char>(c)))
        letters.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
      else if (!letters.empty() && letters.back() != ' ')
        letters.push_back(' ');
    }
    letters = trim(letters);
    if (letters.empty()) continue;
    bool first = letters.find("FIRST") != std::string::npos;
    bool second = letters.find("SECOND") != std::string::npos;
    if (first != second) return first ? Winner::first : Winner::second;
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::size_t> expand(SearchTree& tree, std::size_t parent, std::size_t samples,
                                const Problem& problem, const SearchConfig& config,
                                const StepRetriever& retriever, ModelClient& reasoner,
                                SearchLog& log, CallStats* stats) {
  const auto& node = tree.node(parent);
  if (node.terminal) throw std::logic_error("terminal nodes are never expanded");
  if (node.depth >= config.max_depth) throw std::logic_error("node is at the depth cap");
  const auto prefix = node.trace_prefix;
  const int depth = node.depth;
  const auto rc = reasoner_config(config);

  std::vector<std::size_t> children;
  for (std::size_t s = 0; s < samples; ++s) {
    StepOutcome o;
    o.index = depth + 1;
    try {
      auto attempt = first_try(problem, prefix, reasoner, rc, stats);
      o.first_try_text = attempt.text;
      o.format_deviation = attempt.format_deviation;
      o.final_text = attempt.text;
      if (config.reason_icl) {
        o.retrieval_query = attempt.text;
        o.retrieval_attempted = true;
        if (auto hit = retriever.retrieve_with_rejection(attempt.text, config.rejection_threshold)) {
          RetrievedGuidance g{{hit->record->problem_id, hit->record->step_index,
                               hit->hit.similarity, hit->hit.rank},
                              guidance_from(*hit->record)};
          auto guided = guided_step(problem, prefix, g.guidance, reasoner, rc, stats);
          o.final_text = guided.text;
          o.retrieved = std::move(g);
          o.guided = true;
        }
      }
    } catch (const ModelError& e) {
      log.add({{"event", "sample_failed"}, {"parent", parent}, {"sample", s}, {"error", e.what()}});
      continue;
    }
    const bool terminal = extract_boxed(o.final_text).has_value();
    json ev = {{"event", "node"},      {"id", tree.nodes().size()}, {"parent", parent},
               {"depth", depth + 1},   {"sample", s},               {"guided", o.guided},
               {"terminal", terminal}, {"step", o.final_text}};
    if (o.retrieved) ev["retrieved"] = ref_json(o.retrieved->ref);
    children.push_back(tree.add_child(parent, std::move(o), terminal));
    log.add(std::move(ev));
  }
  if (children.empty())
    throw SearchError("every sample failed while expanding node " + std::to_string(parent));
  return children;
}

PreferenceOutcome pprm_compare(const Problem& problem, const SearchNode& first,
                               const SearchNode& second, const SearchConfig& config,
                               const StepRetriever& retriever, ModelClient& judge,
                               CallStats* stats) {
  PreferenceOutcome out;
  auto reference = [&](const SearchNode& n) -> std::optional<prompts::StepGuidance> {
    if (!config.verify_icl || !n.step_text()) return std::nullopt;
    auto hit = retriever.retrieve_with_rejection(*n.step_text(), config.rejection_threshold);
    if (!hit) return std::nullopt;
    out.examples_used.push_back({hit->record->problem_id, hit->record->step_index,
                                 hit->hit.similarity, hit->hit.rank});
    return guidance_from(*hit->record);
  };
  auto ref_first = reference(first);
  auto ref_second = reference(second);

  ChatRequest req;
  req.messages = prompts::pairwise(problem.statement, first.trace_prefix, second.trace_prefix,
                                   ref_first, ref_second);
  req.model_name = config.pprm_model;
  req.temperature = 0.0;
  req.max_tokens = config.max_tokens;
  try {
    auto resp = judge.complete(req);
    if (stats) stats->record(resp);
    out.raw_reply = resp.content;
    auto winner = parse_winner(resp.content);
    if (!winner) {
      req.messages.push_back({Role::assistant, resp.content});
      req.messages.push_back({Role::user, std::string(prompts::kPairwiseFormatReminder)});
      resp = judge.complete(req);
      if (stats) stats->record(resp);
      out.raw_reply = resp.content;
      winner = parse_winner(resp.content);
    }
    if (winner) {
      out.winner = *winner;
      return out;
    }
  } catch (const ModelError& e) {
    out.raw_reply = std::string("judge error: ") + e.what();
  }
  out.winner = Winner::first;
  out.fallback = true;
  return out;
}

std::vector<std::size_t> select_top(std::size_t n, std::size_t m, const Comparator& compare) {
  if (m > n) throw std::invalid_argument("cannot select more candidates than exist");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (m == n) return order;
  std::vector<std::size_t> wins(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++wins[compare(i, j) == Winner::first ? i : j];
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return wins[a] > wins[b]; });
  order.resize(m);
  return order;
}

SearchResult search(const Problem& problem, const StepRetriever& retriever,
                    const SearchConfig& config, SearchClients clients) {
  config.validate();
  SearchResult res;
  auto& tree = res.tree;
  auto& log = res.log;
  CallStats& stats = res.trace.stats;

  auto comparator_over = [&](const std::vector<std::size_t>& ids, int level) {
    return [&, ids, level](std::size_t i, std::size_t j) {
      auto pref = pprm_compare(problem, tree.node(ids[i]), tree.node(ids[j]), config, retriever,
                               clients.judge, &stats);
      json ev = {{"event", "compare"},         {"level", level},
                 {"first", ids[i]},            {"second", ids[j]},
                 {"winner", to_string(pref.winner)}, {"fallback", pref.fallback}};
      json used = json::array();
      for (const auto& r : pref.examples_used) used.push_back(ref_json(r));
      ev["examples_used"] = std::move(used);
      log.add(std::move(ev));
      return pref.winner;
    };
  };

  std::vector<std::size_t> beam;
  std::vector<std::size_t> finalists;
  auto place = [&](const std::vector<std::size_t>& ids) {
    for (auto id : ids) (tree.node(id).terminal ? finalists : beam).push_back(id);
  };

  log.add({{"event", "start"}, {"problem_id", problem.id}});
  auto initial = expand(tree, 0, config.beam_width, problem, config, retriever, clients.reasoner,
                        log, &stats);
  place(initial);
  log.add({{"event", "select"}, {"level", 1}, {"pool", initial}, {"selected", initial}});

  int level = 1;
  while (finalists.size() < config.beam_width && !beam.empty()) {
    if (tree.node(beam.front()).depth >= config.max_depth) {
      res.depth_capped = true;
      log.add({{"event", "depth_cap"}, {"level", level}, {"beam", beam}});
      finalists.insert(finalists.end(), beam.begin(), beam.end());
      beam.clear();
      break;
    }
    ++level;
    const std::size_t per_parent = config.children_per_level / beam.size();
    std::vector<std::size_t> pool;
    std::string last_error;
    for (auto parent : beam) {
      try {
        auto kids = expand(tree, parent, per_parent, problem, config, retriever, clients.reasoner,
                           log, &stats);
        pool.insert(pool.end(), kids.begin(), kids.end());
      } catch (const SearchError& e) {
        last_error = e.what();
      }
    }
    if (pool.empty()) throw SearchError(last_error);
    const std::size_t slots = std::min(config.beam_width - finalists.size(), pool.size());
    auto picked = select_top(pool.size(), slots, comparator_over(pool, level));
    std::vector<std::size_t> selected;
    for (auto p : picked) selected.push_back(pool[p]);
    log.add({{"event", "select"}, {"level", level}, {"parents", beam}, {"pool", pool},
             {"selected", selected}});
    beam.clear();
    place(selected);
  }

  std::size_t winner = finalists.front();
  if (finalists.size() > 1) {
    auto best = select_top(finalists.size(), 1, comparator_over(finalists, -1));
    winner = finalists[best.front()];
  }
  log.add({{"event", "final"}, {"finalists", finalists}, {"winner", winner},
           {"depth_capped", res.depth_capped}});

  auto& trace = res.trace;
  trace.problem = problem;
  trace.mode = "tree_search";
  std::vector<std::size_t> path;
  for (std::optional<std::size_t> cur = winner; cur && *cur != 0; cur = tree.node(*cur).parent)
    path.push_back(*cur);
  std::reverse(path.begin(), path.end());
  for (auto id : path) trace.steps.push_back(tree.node(id).outcome);
  if (!trace.steps.empty()) trace.terminal_answer = extract_boxed(trace.steps.back().final_text);
  trace.termination = trace.terminal_answer ? Termination::boxed_answer : Termination::max_steps;
  if (res.depth_capped) trace.warnings.push_back("depth cap reached before every path finished");
  return res;
}

}  // namespace booststep
