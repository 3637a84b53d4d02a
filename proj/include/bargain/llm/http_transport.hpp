#pragma once

#include <chrono>
#include <string>
#include <utility>

#include <httplib.h>

#include "bargain/llm/transport.hpp"

namespace bargain::llm {

/// Posts to `<endpoint>/chat/completions` with a bearer key read from the
/// profile's environment variable. HTTPS endpoints need a build with
/// CPPHTTPLIB_OPENSSL_SUPPORT.
class HttpChatTransport final : public ChatTransport {
 public:
  explicit HttpChatTransport(LlmProfile profile, std::chrono::seconds timeout = std::chrono::seconds(120))
      : profile_(std::move(profile)), timeout_(timeout) {
    const auto& ep = profile_.endpoint;
    const auto scheme_end = ep.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = ep.find('/', host_start);
    base_ = ep.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? "" : ep.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  std::string complete(const ChatRequest& request) override {
    httplib::Client cli(base_);
    cli.set_read_timeout(timeout_);
    cli.set_connection_timeout(std::chrono::seconds(10));
    httplib::Headers headers;
    if (const auto key = profile_.api_key(); !key.empty()) headers.emplace("Authorization", "Bearer " + key);
    const auto res = cli.Post(prefix_ + "/chat/completions", headers, chat_request_json(request).dump(),
                              "application/json");
    if (!res) throw TransportError("request to " + base_ + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    try {
      return chat_reply_content(json::parse(res->body));
    } catch (const json::parse_error& e) {
      throw TransportError(std::string("completion body is not JSON: ") + e.what());
    }
  }

 private:
  LlmProfile profile_;
  std::chrono::seconds timeout_;
  std::string base_;
  std::string prefix_;
};

}  // namespace bargain::llm
