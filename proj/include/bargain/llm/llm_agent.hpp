#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bargain/agent.hpp"
#include "bargain/llm/prompt.hpp"
#include "bargain/llm/tags.hpp"
#include "bargain/llm/transport.hpp"

namespace bargain::llm {

using TranscriptSink = std::function<void(const json&)>;

/// Seat driven by a chat model. Out-of-box mode makes one call per
/// decision; refined mode generates up to three ideas and then selects
/// one. Each call is retried up to `profile.retries` times on transport
/// errors, parse errors or invalid offers; after that the decision
/// degrades to a flagged Pass or Decline.
class LlmAgent final : public Agent {
 public:
  LlmAgent(std::shared_ptr<ChatTransport> transport, LlmProfile profile, TranscriptSink sink = {})
      : transport_(std::move(transport)), profile_(std::move(profile)), sink_(std::move(sink)) {}

  std::string_view kind() const override { return "llm"; }
  const LlmProfile& profile() const { return profile_; }
  int calls() const { return calls_; }

  Offer propose(const Observation& obs) override {
    if (!profile_.refined) {
      auto got = ask<Offer>(obs, PromptRole::Proposer, nullptr, {}, [&](const TaggedReply& r) {
        return valid_offer(obs, r.proposals.front().offer);
      });
      return got ? *got : degrade_pass();
    }
    auto ideas = ask<std::vector<Candidate>>(obs, PromptRole::RefinedGenerate, nullptr, {},
                                             [&](const TaggedReply& r) -> std::optional<std::vector<Candidate>> {
                                               std::vector<Candidate> out;
                                               for (const auto& p : r.proposals) out.push_back({p.offer, p.reasoning});
                                               return out;
                                             });
    if (!ideas) return degrade_pass();
    auto chosen = ask<Offer>(obs, PromptRole::RefinedSelect, nullptr, *ideas, [&](const TaggedReply& r) {
      return valid_offer(obs, r.proposals.front().offer);
    });
    return chosen ? *chosen : degrade_pass();
  }

  Response respond(const Observation& obs, const Offer& offer) override {
    auto got = ask<Response>(obs, PromptRole::Responder, &offer, {},
                             [](const TaggedReply& r) -> std::optional<Response> { return r.choice; });
    if (!got) {
      add_flag();
      return Response::Decline;
    }
    return *got;
  }

 private:
  static std::optional<Offer> valid_offer(const Observation& obs, const Offer& o) {
    if (check_offer(obs.own_holdings(), o)) return std::nullopt;
    return o;
  }

  Offer degrade_pass() {
    add_flag();
    return Offer::pass();
  }

  template <typename T, typename Accept>
  std::optional<T> ask(const Observation& obs, PromptRole role, const Offer* offer,
                       std::span<const Candidate> candidates, Accept&& accept) {
    const auto prompt = build_prompt(role, obs, offer, candidates, profile_.temperature);
    const ChatRequest req{profile_.model, {{"user", prompt.text}}, prompt.temperature};
    for (int attempt = 0; attempt <= profile_.retries; ++attempt) {
      json entry{{"seat", obs.self}, {"turn", obs.turn}, {"role", to_string(role)}, {"attempt", attempt},
                 {"model", profile_.model}, {"temperature", prompt.temperature}, {"prompt", prompt.text}};
      ++calls_;
      try {
        const auto text = transport_->complete(req);
        entry["reply"] = text;
        const auto reply = parse_reply(text, role, obs.config);
        if (auto v = accept(reply)) {
          entry["outcome"] = "ok";
          emit(entry);
          return v;
        }
        entry["outcome"] = "invalid";
      } catch (const ParseError& e) {
        entry["outcome"] = "parse_error";
        entry["error"] = e.what();
        entry["error_span"] = {e.offset(), e.length()};
      } catch (const TransportError& e) {
        entry["outcome"] = "transport_error";
        entry["error"] = e.what();
      }
      emit(entry);
    }
    return std::nullopt;
  }

  void emit(const json& entry) {
    if (sink_) sink_(entry);
  }

  std::shared_ptr<ChatTransport> transport_;
  LlmProfile profile_;
  TranscriptSink sink_;
  int calls_ = 0;
};

}  // namespace bargain::llm
