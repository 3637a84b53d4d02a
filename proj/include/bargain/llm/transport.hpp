#pragma once

#include <cstdlib>
#include <deque>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace bargain::llm {

using json = nlohmann::json;

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.5;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One chat-completion round trip. Implementations may be called from
/// several threads.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// Returns queued replies in order, or computes them with a handler once
/// the queue is empty. Records every request.
class FakeTransport final : public ChatTransport {
 public:
  using Handler = std::function<std::string(const ChatRequest&)>;

  FakeTransport() = default;
  explicit FakeTransport(std::deque<std::string> replies) : replies_(std::move(replies)) {}
  explicit FakeTransport(Handler h) : handler_(std::move(h)) {}

  void push(std::string reply) {
    std::lock_guard lock(mu_);
    replies_.push_back(std::move(reply));
  }

  std::string complete(const ChatRequest& request) override {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
    if (!replies_.empty()) {
      auto r = std::move(replies_.front());
      replies_.pop_front();
      return r;
    }
    if (handler_) return handler_(request);
    throw TransportError("fake transport has no reply queued");
  }

  std::vector<ChatRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }
  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return requests_.size();
  }

 private:
  mutable std::mutex mu_;
  std::deque<std::string> replies_;
  Handler handler_;
  std::vector<ChatRequest> requests_;
};

/// Model endpoint settings, loaded from a JSON profile file.
struct LlmProfile {
  std::string name = "default";
  std::string model;
  std::string endpoint = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.5;
  int retries = 2;
  bool refined = false;

  static LlmProfile from_json(const json& j) {
    LlmProfile p;
    p.name = j.value("name", p.name);
    p.model = j.at("model").get<std::string>();
    p.endpoint = j.value("endpoint", p.endpoint);
    p.api_key_env = j.value("api_key_env", p.api_key_env);
    p.temperature = j.value("temperature", p.temperature);
    p.retries = j.value("retries", p.retries);
    const auto mode = j.value("mode", std::string("out_of_box"));
    if (mode == "refined")
      p.refined = true;
    else if (mode != "out_of_box")
      throw std::invalid_argument("profile mode must be out_of_box or refined, got " + mode);
    if (p.retries < 0) throw std::invalid_argument("profile retries must be non-negative");
    return p;
  }

  json to_json() const {
    return {{"name", name},         {"model", model},     {"endpoint", endpoint},
            {"api_key_env", api_key_env}, {"temperature", temperature}, {"retries", retries},
            {"mode", refined ? "refined" : "out_of_box"}};
  }

  std::string api_key() const {
    const char* v = api_key_env.empty() ? nullptr : std::getenv(api_key_env.c_str());
    return v ? v : "";
  }
};

/// Request body for an OpenAI-compatible /chat/completions endpoint.
inline json chat_request_json(const ChatRequest& r) {
  json msgs = json::array();
  for (const auto& m : r.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", r.model}, {"messages", msgs}, {"temperature", r.temperature}};
}

inline std::string chat_reply_content(const json& body) {
  try {
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed completion response: ") + e.what());
  }
}

}  // namespace bargain::llm
