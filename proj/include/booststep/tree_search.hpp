#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "booststep/reasoner.hpp"

namespace booststep {

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SearchConfig {
  std::size_t beam_width = 2;
  std::size_t children_per_level = 4;
  bool reason_icl = true;
  bool verify_icl = true;
  double sample_temperature = 0.3;
  int max_depth = 20;
  double rejection_threshold = 0.7;
  std::string reason_model = "gpt-4o";
  std::string pprm_model = "gpt-4o-mini";
  std::optional<int> max_tokens;

  // Throws std::invalid_argument unless children_per_level >= beam_width >= 1.
  void validate() const;
};

struct SearchNode {
  std::size_t id = 0;  // creation order
  std::optional<std::size_t> parent;
  int depth = 0;
  std::vector<std::string> trace_prefix;  // root -> here, size == depth
  bool terminal = false;
  StepOutcome outcome;  // how this node's step was produced; empty at the root

  const std::string* step_text() const {
    return trace_prefix.empty() ? nullptr : &trace_prefix.back();
  }
};

// Node arena. Node 0 is the root.
class SearchTree {
 public:
  SearchTree();
  const SearchNode& node(std::size_t id) const { return nodes_.at(id); }
  const std::vector<SearchNode>& nodes() const { return nodes_; }
  std::size_t add_child(std::size_t parent, StepOutcome outcome, bool terminal);

 private:
  std::vector<SearchNode> nodes_;
};

enum class Winner { first, second };
const char* to_string(Winner w);

struct PreferenceOutcome {
  Winner winner = Winner::first;
  std::string raw_reply;
  std::vector<ExampleRef> examples_used;
  bool fallback = false;  // judge never produced FIRST/SECOND
};

// Append-only audit log of a search. Each event is one JSON object.
struct SearchLog {
  std::vector<nlohmann::json> events;
  void add(nlohmann::json event) { events.push_back(std::move(event)); }
};

// Samples `samples` children of `parent`. Failed samples are logged and
// dropped; throws SearchError if none survive.
std::vector<std::size_t> expand(SearchTree& tree, std::size_t parent, std::size_t samples,
                                const Problem& problem, const SearchConfig& config,
                                const StepRetriever& retriever, ModelClient& reasoner,
                                SearchLog& log, CallStats* stats = nullptr);

// Forced-choice judge call between two partial solutions of the same problem.
PreferenceOutcome pprm_compare(const Problem& problem, const SearchNode& first,
                               const SearchNode& second, const SearchConfig& config,
                               const StepRetriever& retriever, ModelClient& judge,
                               CallStats* stats = nullptr);

// Answers "which of candidates i < j wins".
using Comparator = std::function<Winner(std::size_t i, std::size_t j)>;

// Round robin over all unordered pairs, ranked by wins then by position.
// Returns the positions of the top m. m == n skips all comparisons.
std::vector<std::size_t> select_top(std::size_t n, std::size_t m, const Comparator& compare);

struct SearchClients {
  ModelClient& reasoner;
  ModelClient& judge;
};

struct SearchResult {
  ReasoningTrace trace;
  SearchTree tree;
  SearchLog log;
  bool depth_capped = false;
};

// Beam search over steps: beam_width parents, children_per_level pooled
// children per level, pairwise selection back to the beam, and one final
// comparison between the finished paths.
SearchResult search(const Problem& problem, const StepRetriever& retriever,
                    const SearchConfig& config, SearchClients clients);

}  // namespace booststep
