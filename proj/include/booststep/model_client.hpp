#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace booststep {

enum class Role { system, user, assistant };

const char* to_string(Role role);
Role role_from_string(const std::string& s);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::optional<int> max_tokens;
  std::string model_name;
  std::optional<std::int64_t> seed;

  // Throws std::invalid_argument when messages are empty, the first role is
  // assistant, or the temperature is negative.
  void validate() const;
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct ChatResponse {
  std::string content;
  std::optional<TokenUsage> usage;
  bool cached = false;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Network failure, timeout, or retry budget exhausted on transient statuses.
class TransportError : public ModelError {
 public:
  using ModelError::ModelError;
};

// Non-success HTTP status that is not retried (or the last retried one).
class ApiError : public ModelError {
 public:
  ApiError(int status, std::string body_excerpt);
  int status() const { return status_; }
  const std::string& body_excerpt() const { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

// A scripted client received a request no fixture covers. Always a test bug.
class FixtureMissError : public ModelError {
 public:
  using ModelError::ModelError;
};

class ModelClient {
 public:
  virtual ~ModelClient() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// Hex SHA-256 over (model_name, temperature, seed, messages). Trailing
// whitespace of each message body is ignored; max_tokens is not part of it.
std::string fingerprint(const ChatRequest& request);

// Flat "role:\ncontent" rendering used for fixture matching and logs.
std::string render_request_text(const ChatRequest& request);

/// Deterministic replay client.
///
/// Rules are checked in insertion order after exact fingerprint entries.
/// A rule with one reply always answers with it; a rule with several replies
/// hands them out in order and is skipped once exhausted, which is how
/// sampled generations are emulated.
class ScriptedClient : public ModelClient {
 public:
  struct Reply {
    enum class Kind { text, transport_error, api_error };
    Kind kind = Kind::text;
    std::string content;
    int status = 0;

    static Reply text(std::string content) { return {Kind::text, std::move(content), 0}; }
    static Reply transport_failure() { return {Kind::transport_error, {}, 0}; }
    static Reply api_failure(int status, std::string body = {}) {
      return {Kind::api_error, std::move(body), status};
    }
  };

  struct Rule {
    std::optional<std::string> fingerprint;
    std::optional<std::string> contains;
    std::optional<std::string> regex;
    std::optional<std::string> model;
    std::vector<Reply> replies;
    std::size_t next = 0;
  };

  ScriptedClient() = default;

  // Line-delimited JSON fixtures; see README for the record layout.
  static std::unique_ptr<ScriptedClient> from_file(const std::string& path);
  static std::unique_ptr<ScriptedClient> from_jsonl(const std::string& text);

  void add_exact(std::string fingerprint, std::string reply);
  void add_contains(std::string needle, std::vector<std::string> replies);
  void add_rule(Rule rule);

  ChatResponse complete(const ChatRequest& request) override;

  std::vector<ChatRequest> calls() const;
  std::size_t call_count() const;

 private:
  mutable std::mutex mu_;
  std::vector<Rule> rules_;
  std::vector<ChatRequest> calls_;
};

// Adapts a plain function; handy for fixtures whose reply depends on the prompt.
class CallbackClient : public ModelClient {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  explicit CallbackClient(Fn fn) : fn_(std::move(fn)) {}
  ChatResponse complete(const ChatRequest& request) override;

 private:
  Fn fn_;
};

struct CallRecord {
  ChatRequest request;
  std::optional<ChatResponse> response;
  std::string error;
};

// Pass-through decorator that keeps a log of every request and outcome.
class RecordingClient : public ModelClient {
 public:
  explicit RecordingClient(ModelClient& inner) : inner_(inner) {}
  ChatResponse complete(const ChatRequest& request) override;
  std::vector<CallRecord> records() const;
  void clear();

 private:
  ModelClient& inner_;
  mutable std::mutex mu_;
  std::vector<CallRecord> records_;
};

/// Content-addressed response cache under `dir/<fp[0:2]>/<fp>.json`.
/// Only temperature-0 requests are looked up or stored.
class CachingClient : public ModelClient {
 public:
  CachingClient(ModelClient& inner, std::filesystem::path dir);
  ChatResponse complete(const ChatRequest& request) override;
  std::size_t hits() const;

 private:
  std::filesystem::path path_for(const std::string& fp) const;

  ModelClient& inner_;
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::size_t hits_ = 0;
};

struct HttpClientConfig {
  // Base URL up to and excluding "/chat/completions", e.g. "https://api.openai.com/v1".
  std::string endpoint;
  std::string api_key;
  std::string organization;
  int timeout_seconds = 120;
  int max_attempts = 3;
  int initial_backoff_ms = 500;

  // Fills api_key / organization from BOOSTSTEP_API_KEY (or OPENAI_API_KEY)
  // and BOOSTSTEP_ORGANIZATION.
  static HttpClientConfig from_env(std::string endpoint);
};

// Chat-completions client. Retries timeouts, 429 and 5xx with exponential backoff.
class HttpChatClient : public ModelClient {
 public:
  explicit HttpChatClient(HttpClientConfig config);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  HttpClientConfig config_;
  std::string origin_;
  std::string base_path_;
};

}  // namespace booststep
