#include "booststep/reasoner.hpp"

#include "booststep/text_util.hpp"

namespace booststep {

const char* to_string(RetrievalKey key) {
  switch (key) {
    case RetrievalKey::first_try: return "first_try";
    case RetrievalKey::path: return "path";
    case RetrievalKey::pre_step: return "pre_step";
  }
  return "first_try";
}

RetrievalKey retrieval_key_from_string(const std::string& s) {
  if (s == "first_try") return RetrievalKey::first_try;
  if (s == "path") return RetrievalKey::path;
  if (s == "pre_step") return RetrievalKey::pre_step;
  throw std::invalid_argument("unknown retrieval key: " + s);
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::boxed_answer: return "boxed_answer";
    case Termination::max_steps: return "max_steps";
    case Termination::model_error: return "model_error";
  }
  return "max_steps";
}

Termination termination_from_string(const std::string& s) {
  if (s == "boxed_answer") return Termination::boxed_answer;
  if (s == "max_steps") return Termination::max_steps;
  if (s == "model_error") return Termination::model_error;
  throw std::invalid_argument("unknown termination: " + s);
}

void CallStats::record(const ChatResponse& response) {
  ++calls;
  if (response.cached) ++cache_hits;
  if (response.usage) {
    prompt_tokens += response.usage->prompt_tokens;
    completion_tokens += response.usage->completion_tokens;
  }
}

CallStats& CallStats::operator+=(const CallStats& o) {
  calls += o.calls;
  cache_hits += o.cache_hits;
  prompt_tokens += o.prompt_tokens;
  completion_tokens += o.completion_tokens;
  return *this;
}

std::optional<std::string> extract_boxed(std::string_view text) {
  static constexpr std::string_view kOpen = "\\boxed{";
  auto pos = text.rfind(kOpen);
  if (pos == std::string_view::npos) return std::nullopt;
  std::size_t begin = pos + kOpen.size();
  int depth = 1;
  for (std::size_t i = begin; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\\' && i + 1 < text.size() && (text[i + 1] == '{' || text[i + 1] == '}')) {
      ++i;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return std::string(text.substr(begin, i - begin));
    }
  }
  return std::nullopt;
}

namespace {

ChatResponse call(ModelClient& client, std::vector<ChatMessage> messages,
                  const ReasonerConfig& config, CallStats* stats) {
  ChatRequest req;
  req.messages = std::move(messages);
  req.model_name = config.model;
  req.temperature = config.temperature;
  req.max_tokens = config.max_tokens;
  auto resp = client.complete(req);
  if (stats) stats->record(resp);
  return resp;
}

StepAttempt parse_step(const std::string& reply) {
  auto p = prompts::strip_step_prefix(reply);
  return {p.body, !p.matched};
}

void finish_single_call(ReasoningTrace& trace, const std::string& reply) {
  StepOutcome o;
  o.index = 1;
  o.first_try_text = reply;
  o.final_text = reply;
  trace.steps.push_back(std::move(o));
  trace.terminal_answer = extract_boxed(reply);
  trace.termination = trace.terminal_answer ? Termination::boxed_answer : Termination::max_steps;
}

}  // namespace

StepAttempt first_try(const Problem& problem, const std::vector<std::string>& prior_steps,
                      ModelClient& client, const ReasonerConfig& config, CallStats* stats) {
  auto resp = call(client, prompts::first_try(problem.statement, prior_steps), config, stats);
  return parse_step(resp.content);
}

StepAttempt guided_step(const Problem& problem, const std::vector<std::string>& prior_steps,
                        const prompts::StepGuidance& guidance, ModelClient& client,
                        const ReasonerConfig& config, CallStats* stats) {
  auto resp = call(client, prompts::step_guided(problem.statement, prior_steps, guidance), config,
                   stats);
  return parse_step(resp.content);
}

prompts::StepGuidance guidance_from(const StepRecord& record) {
  return {record.statement, record.preceding_steps, record.step_text};
}

std::string retrieval_query(RetrievalKey key, const Problem& problem,
                            const std::vector<std::string>& prior_steps,
                            const std::string& first_try_text) {
  switch (key) {
    case RetrievalKey::first_try:
      return first_try_text;
    case RetrievalKey::path: {
      std::string q = problem.statement;
      for (const auto& s : prior_steps) q += "\n" + s;
      return q;
    }
    case RetrievalKey::pre_step:
      return prior_steps.empty() ? problem.statement : prior_steps.back();
  }
  return first_try_text;
}

ReasoningTrace solve_zero_shot(const Problem& problem, ModelClient& client,
                               const ReasonerConfig& config) {
  ReasoningTrace trace;
  trace.problem = problem;
  trace.mode = "zero_shot";
  try {
    auto resp = call(client, prompts::zero_shot(problem.statement), config, &trace.stats);
    finish_single_call(trace, resp.content);
  } catch (const ModelError& e) {
    trace.termination = Termination::model_error;
    trace.error = e.what();
  }
  return trace;
}

ReasoningTrace solve_few_shot(const Problem& problem, const ProblemRetriever& retriever,
                              ModelClient& client, const ReasonerConfig& config) {
  ReasoningTrace trace;
  trace.problem = problem;
  trace.mode = "few_shot";
  std::vector<prompts::ShotExample> shots;
  for (const auto& h : retriever.retrieve(problem.statement, config.shot_count, config.rank_offset)) {
    shots.push_back({h.problem->statement, h.problem->steps});
    trace.examples.push_back({h.problem->id, std::nullopt, h.hit.similarity, h.hit.rank});
  }
  if (shots.size() < config.shot_count) {
    trace.warnings.push_back("only " + std::to_string(shots.size()) + " of " +
                             std::to_string(config.shot_count) + " examples available");
  }
  try {
    auto resp = call(client, prompts::few_shot(problem.statement, shots), config, &trace.stats);
    finish_single_call(trace, resp.content);
  } catch (const ModelError& e) {
    trace.termination = Termination::model_error;
    trace.error = e.what();
  }
  return trace;
}

ReasoningTrace solve_step_level(const Problem& problem, const StepRetriever& retriever,
                                ModelClient& client, const ReasonerConfig& config) {
  ReasoningTrace trace;
  trace.problem = problem;
  trace.mode = "booststep";
  std::vector<std::string> accepted;
  for (int i = 1; i <= config.max_steps; ++i) {
    StepOutcome o;
    o.index = i;
    try {
      auto attempt = first_try(problem, accepted, client, config, &trace.stats);
      o.first_try_text = attempt.text;
      o.format_deviation = attempt.format_deviation;
      o.retrieval_query = retrieval_query(config.retrieval_key, problem, accepted, attempt.text);
      o.retrieval_attempted = true;
      auto hit = retriever.retrieve_with_rejection(o.retrieval_query, config.rejection_threshold,
                                                   config.rank_offset);
      if (hit) {
        RetrievedGuidance g{{hit->record->problem_id, hit->record->step_index, hit->hit.similarity,
                             hit->hit.rank},
                            guidance_from(*hit->record)};
        auto guided = guided_step(problem, accepted, g.guidance, client, config, &trace.stats);
        if (guided.format_deviation)
          trace.warnings.push_back("step " + std::to_string(i) + ": guided reply lacks step prefix");
        o.final_text = guided.text;
        o.retrieved = std::move(g);
        o.guided = true;
      } else {
        o.final_text = o.first_try_text;
      }
    } catch (const ModelError& e) {
      trace.termination = Termination::model_error;
      trace.error = e.what();
      return trace;
    }
    if (o.format_deviation)
      trace.warnings.push_back("step " + std::to_string(i) + ": first try lacks step prefix");
    accepted.push_back(o.final_text);
    auto answer = extract_boxed(o.final_text);
    trace.steps.push_back(std::move(o));
    if (answer) {
      trace.terminal_answer = std::move(answer);
      trace.termination = Termination::boxed_answer;
      return trace;
    }
  }
  trace.termination = Termination::max_steps;
  return trace;
}

}  // namespace booststep
