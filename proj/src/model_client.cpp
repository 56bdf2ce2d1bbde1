#include "booststep/model_client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "booststep/digest.hpp"
#include "booststep/text_util.hpp"

namespace booststep {

using nlohmann::json;

const char* to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(const std::string& s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw std::invalid_argument("unknown role: " + s);
}

void ChatRequest::validate() const {
  if (messages.empty()) throw std::invalid_argument("chat request has no messages");
  if (messages.front().role == Role::assistant)
    throw std::invalid_argument("first message must be system or user");
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
}

ApiError::ApiError(int status, std::string body_excerpt)
    : ModelError("API error " + std::to_string(status) + ": " + body_excerpt),
      status_(status),
      body_excerpt_(std::move(body_excerpt)) {}

std::string fingerprint(const ChatRequest& request) {
  json msgs = json::array();
  for (const auto& m : request.messages) msgs.push_back({to_string(m.role), trim_right(m.content)});
  json j = {{"model", request.model_name},
            {"temperature", request.temperature},
            {"seed", request.seed ? json(*request.seed) : json(nullptr)},
            {"messages", std::move(msgs)}};
  return sha256_hex(j.dump());
}

std::string render_request_text(const ChatRequest& request) {
  std::string out;
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    if (i) out += "\n\n";
    out += to_string(request.messages[i].role);
    out += ":\n";
    out += request.messages[i].content;
  }
  return out;
}

// ---------------------------------------------------------------------------
// ScriptedClient

namespace {

ScriptedClient::Rule rule_from_json(const json& j) {
  ScriptedClient::Rule rule;
  if (j.contains("fingerprint")) rule.fingerprint = j.at("fingerprint").get<std::string>();
  if (j.contains("contains")) rule.contains = j.at("contains").get<std::string>();
  if (j.contains("match")) rule.regex = j.at("match").get<std::string>();
  if (j.contains("model")) rule.model = j.at("model").get<std::string>();
  if (j.contains("reply")) {
    rule.replies.push_back(ScriptedClient::Reply::text(j.at("reply").get<std::string>()));
  } else if (j.contains("replies")) {
    for (const auto& r : j.at("replies")) rule.replies.push_back(ScriptedClient::Reply::text(r));
  } else if (j.contains("error")) {
    auto kind = j.at("error").get<std::string>();
    if (kind == "transport") {
      rule.replies.push_back(ScriptedClient::Reply::transport_failure());
    } else if (kind == "api") {
      rule.replies.push_back(
          ScriptedClient::Reply::api_failure(j.value("status", 500), j.value("body", "")));
    } else {
      throw std::invalid_argument("unknown fixture error kind: " + kind);
    }
  }
  if (rule.replies.empty()) throw std::invalid_argument("fixture rule without reply");
  if (!rule.fingerprint && !rule.contains && !rule.regex)
    throw std::invalid_argument("fixture rule needs fingerprint, contains or match");
  return rule;
}

}  // namespace

std::unique_ptr<ScriptedClient> ScriptedClient::from_jsonl(const std::string& text) {
  auto client = std::make_unique<ScriptedClient>();
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    try {
      client->add_rule(rule_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("fixture line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return client;
}

std::unique_ptr<ScriptedClient> ScriptedClient::from_file(const std::string& path) {
  return from_jsonl(read_file(path));
}

void ScriptedClient::add_exact(std::string fp, std::string reply) {
  Rule r;
  r.fingerprint = std::move(fp);
  r.replies.push_back(Reply::text(std::move(reply)));
  add_rule(std::move(r));
}

void ScriptedClient::add_contains(std::string needle, std::vector<std::string> replies) {
  Rule r;
  r.contains = std::move(needle);
  for (auto& s : replies) r.replies.push_back(Reply::text(std::move(s)));
  add_rule(std::move(r));
}

void ScriptedClient::add_rule(Rule rule) {
  std::lock_guard lock(mu_);
  rules_.push_back(std::move(rule));
}

ChatResponse ScriptedClient::complete(const ChatRequest& request) {
  request.validate();
  const auto fp = fingerprint(request);
  const auto text = render_request_text(request);
  std::lock_guard lock(mu_);
  calls_.push_back(request);

  auto available = [&](const Rule& r) {
    if (r.model && *r.model != request.model_name) return false;
    return r.replies.size() == 1 || r.next < r.replies.size();
  };
  auto take = [&](Rule& r) -> ChatResponse {
    const Reply& reply = r.replies.size() == 1 ? r.replies.front() : r.replies[r.next++];
    switch (reply.kind) {
      case Reply::Kind::transport_error:
        throw TransportError("scripted transport failure");
      case Reply::Kind::api_error:
        throw ApiError(reply.status, reply.content);
      case Reply::Kind::text:
        break;
    }
    return ChatResponse{reply.content, std::nullopt, false};
  };

  for (auto& r : rules_) {
    if (r.fingerprint && *r.fingerprint == fp && available(r)) return take(r);
  }
  for (auto& r : rules_) {
    if (r.fingerprint || !available(r)) continue;
    if (r.contains && text.find(*r.contains) == std::string::npos) continue;
    if (r.regex && !std::regex_search(text, std::regex(*r.regex))) continue;
    return take(r);
  }
  throw FixtureMissError("no fixture for request " + fp.substr(0, 12) + " (model " +
                         request.model_name + "):\n" + text.substr(0, 400));
}

std::vector<ChatRequest> ScriptedClient::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t ScriptedClient::call_count() const {
  std::lock_guard lock(mu_);
  return calls_.size();
}

ChatResponse CallbackClient::complete(const ChatRequest& request) {
  request.validate();
  return ChatResponse{fn_(request), std::nullopt, false};
}

// ---------------------------------------------------------------------------
// RecordingClient

ChatResponse RecordingClient::complete(const ChatRequest& request) {
  CallRecord rec{request, std::nullopt, {}};
  try {
    auto resp = inner_.complete(request);
    rec.response = resp;
    std::lock_guard lock(mu_);
    records_.push_back(std::move(rec));
    return resp;
  } catch (const std::exception& e) {
    rec.error = e.what();
    std::lock_guard lock(mu_);
    records_.push_back(std::move(rec));
    throw;
  }
}

std::vector<CallRecord> RecordingClient::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

void RecordingClient::clear() {
  std::lock_guard lock(mu_);
  records_.clear();
}

// ---------------------------------------------------------------------------
// CachingClient

CachingClient::CachingClient(ModelClient& inner, std::filesystem::path dir)
    : inner_(inner), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path CachingClient::path_for(const std::string& fp) const {
  return dir_ / fp.substr(0, 2) / (fp + ".json");
}

ChatResponse CachingClient::complete(const ChatRequest& request) {
  if (request.temperature != 0.0) return inner_.complete(request);
  const auto fp = fingerprint(request);
  const auto path = path_for(fp);
  {
    std::ifstream in(path);
    if (in) {
      try {
        json j = json::parse(in);
        ChatResponse resp;
        resp.content = j.at("content").get<std::string>();
        if (j.contains("usage") && j["usage"].is_object())
          resp.usage = TokenUsage{j["usage"].value("prompt_tokens", std::int64_t{0}),
                                  j["usage"].value("completion_tokens", std::int64_t{0})};
        resp.cached = true;
        std::lock_guard lock(mu_);
        ++hits_;
        return resp;
      } catch (const json::exception&) {
        // unreadable entry: fall through and overwrite it
      }
    }
  }
  auto resp = inner_.complete(request);
  json j = {{"content", resp.content}};
  if (resp.usage)
    j["usage"] = {{"prompt_tokens", resp.usage->prompt_tokens},
                  {"completion_tokens", resp.usage->completion_tokens}};
  // Unique temp name per writer; identical keys carry identical values at temperature 0.
  auto tmp = path;
  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id();
  tmp += suffix.str();
  std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump();
  }
  std::filesystem::rename(tmp, path);
  resp.cached = false;
  return resp;
}

std::size_t CachingClient::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

// ---------------------------------------------------------------------------
// HttpChatClient

HttpClientConfig HttpClientConfig::from_env(std::string endpoint) {
  HttpClientConfig c;
  c.endpoint = std::move(endpoint);
  if (const char* k = std::getenv("BOOSTSTEP_API_KEY")) c.api_key = k;
  else if (const char* k2 = std::getenv("OPENAI_API_KEY")) c.api_key = k2;
  if (const char* o = std::getenv("BOOSTSTEP_ORGANIZATION")) c.organization = o;
  return c;
}

HttpChatClient::HttpChatClient(HttpClientConfig config) : config_(std::move(config)) {
  static const std::regex kUrl(R"(^(https?)://([^/:]+)(:\d+)?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl))
    throw std::invalid_argument("endpoint must be an http(s) URL: " + config_.endpoint);
  origin_ = m[1].str() + "://" + m[2].str() + m[3].str();
  base_path_ = m[4].str();
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  if (config_.max_attempts < 1) config_.max_attempts = 1;
}

ChatResponse HttpChatClient::complete(const ChatRequest& request) {
  request.validate();
  json body = {{"model", request.model_name}, {"temperature", request.temperature}};
  json msgs = json::array();
  for (const auto& m : request.messages)
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  body["messages"] = std::move(msgs);
  if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
  if (request.seed) body["seed"] = *request.seed;
  const auto payload = body.dump();

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  if (!config_.organization.empty()) headers.emplace("OpenAI-Organization", config_.organization);

  const std::string path = base_path_ + "/chat/completions";
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config_.initial_backoff_ms * (1 << (attempt - 2))));
    }
    httplib::Client cli(origin_);
    cli.set_connection_timeout(config_.timeout_seconds, 0);
    cli.set_read_timeout(config_.timeout_seconds, 0);
    cli.set_write_timeout(config_.timeout_seconds, 0);
    auto res = cli.Post(path, headers, payload, "application/json");
    if (!res) {
      auto err = res.error();
      last_error = httplib::to_string(err);
      bool transient = err == httplib::Error::Read || err == httplib::Error::Write ||
                       err == httplib::Error::ConnectionTimeout;
      if (transient && attempt < config_.max_attempts) continue;
      throw TransportError("request to " + origin_ + path + " failed: " + last_error);
    }
    const int status = res->status;
    if (status == 429 || status >= 500) {
      if (attempt < config_.max_attempts) continue;
      throw ApiError(status, res->body.substr(0, 500));
    }
    if (status < 200 || status >= 300) throw ApiError(status, res->body.substr(0, 500));
    try {
      auto j = json::parse(res->body);
      const auto& msg = j.at("choices").at(0).at("message");
      ChatResponse out;
      if (msg.contains("content") && msg["content"].is_string())
        out.content = msg["content"].get<std::string>();
      if (j.contains("usage") && j["usage"].is_object())
        out.usage = TokenUsage{j["usage"].value("prompt_tokens", std::int64_t{0}),
                               j["usage"].value("completion_tokens", std::int64_t{0})};
      return out;
    } catch (const json::exception& e) {
      throw ApiError(status, std::string("malformed response: ") + e.what());
    }
  }
  throw TransportError("request failed: " + last_error);
}

}  // namespace booststep
