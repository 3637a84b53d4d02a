#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bargain/agent.hpp"

namespace bargain::llm {

enum class PromptRole { Proposer, Responder, RefinedGenerate, RefinedSelect };

inline std::string_view to_string(PromptRole r) {
  switch (r) {
    case PromptRole::Proposer: return "proposer";
    case PromptRole::Responder: return "responder";
    case PromptRole::RefinedGenerate: return "refined_generate";
    case PromptRole::RefinedSelect: return "refined_select";
  }
  return "?";
}

class TemplateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kDefaultTemperature = 0.5;

namespace templates {

inline constexpr std::string_view kRules =
    R"(How the game works:
The game consists of 3 rounds of trading. During each round, each player will have a turn to propose 1 trade. These turns are pre-determined in a random order and the order stays the same in each round.
Trade proposals:
To propose a trade, a player must:
1. Request a certain quantity of chips of a single color from any other player to get.
2. Specify a certain quantity of chips of a different color to give in return.
Trade rules:
Players cannot offer more chips than they currently hold. For example, if you only have 5 red chips, you cannot offer 6 red chips.
Players cannot trade chips of the same color. For example, you cannot trade red chips for red chips.
Trade completion:
When an offer is presented, all other active participants get a chance to accept or decline. Note: Active participants are those not currently making the offer.
Participants make their decisions simultaneously and privately. The participant who receives the offer is not dependent on who accepts the trade first. Some possible outcomes:
If no one accepts, the trade does not happen, and the turn ends.
If multiple participants accept, one accepting participant is chosen at random to complete the trade with the offering participant. This means that participants cannot choose who they trade with.
If only one participant accepts, the trade will happen.
Key points to remember:
In each round, each player gets to propose one trade and respond to other player's trades
You can only propose trades between different colored chips, and cannot offer to give a chip amount that you do not have
When multiple players accept a trade, the trading partner is randomly selected
)";

inline constexpr std::string_view kProposalTags =
    R"(```
<REASONING>
[Provide your concise reasoning in a few sentences, e.g. To gain more surplus, I want more xxx chips]
</REASONING>
<CHECK>
[check if you have sufficient chips to trade. If you have n green chips, you can at most give n green chips. If you don't want to trade, you can ask for a large amount of chips that no one can afford]
<\CHECK>
<GET_COLOR> Color, e.g. red</GET_COLOR>
<GET_QUANTITY> quantity, e.g. n </GET_QUANTITY>
<GIVE_COLOR> Color, e.g. red</GIVE_COLOR>
<GIVE_QUANTITY> quantity, e.g. n </GIVE_QUANTITY>
```
)";

inline constexpr std::string_view kProposerHead =
    R"(You are {{name}}.
Your valuations of the different types of chips are: {{preference_description}}.
You now have the following amounts of each chip: {{item}}.
The conversation history so far is {{history}}.
REMEMBER, to propose a trade, you must:
Request a certain quantity of chips of a single color from any other player to get
Specify a certain quantity of chips of a different color to give in return
REMEMBER you have the following amounts of each chip: {{item}}.
Your goal is to make as much money as possible. The trades, you choose to make to accomplish this, are up to you.
)";

inline constexpr std::string_view kProposer =
    R"(As a part of making money you must be rational - do not propose a trade in which you lose money. The value of a trade to you is the difference between the total value of chips you receive (quantity x your valuation) minus the total value of chips you give up (quantity x your valuation). Only propose trades that give you positive value.
In short, your trades should be both incentive compatible and incentive rational.
Your response must use these EXACT tags below. The response should include nothing else besides the tags, your trade offer, and your reasoning. The text between tags should be concise.
)";

inline constexpr std::string_view kRefinedRationality =
    R"(As a part of making money you must be rational - do not propose a trade in which you lose money. The value of a trade to you is the difference between the total value of chips you receive (quantity × your valuation) minus the total value of chips you give up (quantity × your valuation). Only propose trades that give you positive value.
In short, your trades should be both incentive compatible and incentive rational.
You can trade as many chips as you want in a single turn, assuming you have that many. Do not feel constrained to only trade a single chip at a time.
)";

inline constexpr std::string_view kRefinedGenerate =
    R"(Propose 3 different good trade ideas, so a next step can decide on the best trade of the ones you propose here.
Your response must use these EXACT tags below. The response should include nothing else besides the tags, your trade offer, and your reasoning. The text between tags should be concise.
Repeat the below tags once for each of the trade ideas you propose.
)";

inline constexpr std::string_view kRefinedSelect =
    R"(Below are three trade ideas you have proposed. Please pick the best trade proposal from the ones below that you will propose to the group.
Do not change anything about the trade you have selected from the ideas below.
Your response must use these EXACT tags below. The response should include nothing else besides the tags and content of your selected trade offer including its reasoning.
)";

inline constexpr std::string_view kRefinedSelectTail =
    R"(Proposed trade ideas to choose from:
{{proposed}}
)";

inline constexpr std::string_view kResponder =
    R"(You are {{name}}.
Your valuations of the different types of chips are: {{preference_description}}.
You now have the following amounts of each chip: {{item}}.
The conversation history so far is {{history}}.
You have an offer. {{proposer}} is offering to give {{give}} and get {{get}} in return.
If you make this trade, your total wealth will change by: {{delta_surplus}}
Now, you need to decide whether to accept or decline.
Your response must use these EXACT tags below. The response should include nothing else besides the tags, your choice to accept or decline, and your reasoning. The text between tags should be concise.
```
<REASONING>
[Provide your concise reasoning in a few sentences.]
</REASONING>
<CHOICE>Yes or No </CHOICE>
)";

}  // namespace templates

using Slots = std::vector<std::pair<std::string, std::string>>;

/// Fills every {{slot}}; any unknown or unfilled slot is a TemplateError.
inline std::string render(std::string_view tmpl, const Slots& slots) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const auto close = tmpl.find("}}", open);
    if (close == std::string_view::npos) throw TemplateError("unterminated slot");
    out.append(tmpl.substr(pos, open - pos));
    const auto name = tmpl.substr(open + 2, close - open - 2);
    bool found = false;
    for (const auto& [k, v] : slots)
      if (k == name) {
        out.append(v);
        found = true;
        break;
      }
    if (!found) throw TemplateError("no value for slot {{" + std::string(name) + "}}");
    pos = close + 2;
  }
  return out;
}

inline std::string player_name(int player) { return "Player " + std::to_string(player + 1); }

inline std::string chips_phrase(const GameConfig& c, int color, int qty) {
  return std::to_string(qty) + " " + c.colors[color] + (qty == 1 ? " chip" : " chips");
}

inline std::string preference_description(const GameConfig& c, std::span<const Cents> values) {
  std::string out;
  for (int k = 0; k < c.n_colors(); ++k)
    out += (k ? ", " : "") + c.colors[k] + ": $" + format_dollars(values[k]) + " per chip";
  return out;
}

inline std::string item_description(const GameConfig& c, std::span<const int> holdings) {
  std::string out;
  for (int k = 0; k < c.n_colors(); ++k) out += (k ? ", " : "") + std::to_string(holdings[k]) + " " + c.colors[k];
  return out;
}

/// Public ledger as compact lines, one per completed turn.
inline std::string history_description(const GameConfig& c, std::span<const TurnRecord> history) {
  if (history.empty()) return "(no turns yet)";
  std::string out;
  for (const auto& t : history) {
    out += "\nRound " + std::to_string(t.round + 1) + ", turn " + std::to_string(t.turn + 1) + ": ";
    if (t.offer.is_pass()) {
      out += player_name(t.proposer) + " made no offer.";
      continue;
    }
    out += player_name(t.proposer) + " offered to give " + chips_phrase(c, t.offer.give_color, t.offer.give_qty) +
           " and get " + chips_phrase(c, t.offer.get_color, t.offer.get_qty) + ". ";
    std::string acc, dec;
    for (int p = 0; p < static_cast<int>(t.responses.size()); ++p) {
      if (t.responses[p] == Response::Accept) acc += (acc.empty() ? "" : ", ") + player_name(p);
      if (t.responses[p] == Response::Decline) dec += (dec.empty() ? "" : ", ") + player_name(p);
    }
    if (!acc.empty()) out += "Accepted by " + acc + ". ";
    if (!dec.empty()) out += "Declined by " + dec + ". ";
    out += t.executed ? "Trade completed with " + player_name(*t.selected_acceptor) + "." : "No trade.";
  }
  return out;
}

/// Renders one proposal as the tag block the model is asked to emit.
inline std::string proposal_block(const GameConfig& c, const Offer& o, std::string_view reasoning) {
  return "<REASONING>" + std::string(reasoning) + "</REASONING>\n<GET_COLOR>" + c.colors[o.get_color] +
         "</GET_COLOR>\n<GET_QUANTITY>" + std::to_string(o.get_qty) + "</GET_QUANTITY>\n<GIVE_COLOR>" +
         c.colors[o.give_color] + "</GIVE_COLOR>\n<GIVE_QUANTITY>" + std::to_string(o.give_qty) +
         "</GIVE_QUANTITY>";
}

struct Candidate {
  Offer offer;
  std::string reasoning;
};

struct PromptBundle {
  PromptRole role;
  std::string text;
  double temperature = kDefaultTemperature;
};

/// `offer` is required for Responder and forbidden otherwise; `candidates`
/// is required for RefinedSelect.
inline PromptBundle build_prompt(PromptRole role, const Observation& obs, const Offer* offer = nullptr,
                                 std::span<const Candidate> candidates = {},
                                 double temperature = kDefaultTemperature) {
  if ((role == PromptRole::Responder) != (offer != nullptr))
    throw TemplateError("an offer is required exactly for responder prompts");
  if (role == PromptRole::RefinedSelect && candidates.empty())
    throw TemplateError("refined select needs candidate proposals");
  if (offer && offer->is_pass()) throw TemplateError("cannot respond to a Pass");

  const auto& c = obs.config;
  Slots slots{{"name", player_name(obs.self)},
              {"preference_description", preference_description(c, obs.own_values)},
              {"item", item_description(c, obs.own_holdings())},
              {"history", history_description(c, obs.history)}};

  std::string body;
  switch (role) {
    case PromptRole::Proposer:
      body = std::string(templates::kProposerHead) + std::string(templates::kProposer) +
             std::string(templates::kProposalTags);
      break;
    case PromptRole::RefinedGenerate:
      body = std::string(templates::kProposerHead) + std::string(templates::kRefinedRationality) +
             std::string(templates::kRefinedGenerate) + std::string(templates::kProposalTags);
      break;
    case PromptRole::RefinedSelect: {
      body = std::string(templates::kProposerHead) + std::string(templates::kRefinedRationality) +
             std::string(templates::kRefinedSelect) + std::string(templates::kProposalTags) +
             std::string(templates::kRefinedSelectTail);
      std::string proposed;
      for (std::size_t i = 0; i < candidates.size(); ++i)
        proposed += "Trade idea " + std::to_string(i + 1) + ":\n" +
                    proposal_block(c, candidates[i].offer, candidates[i].reasoning) + "\n";
      slots.emplace_back("proposed", proposed);
      break;
    }
    case PromptRole::Responder:
      body = std::string(templates::kResponder);
      slots.emplace_back("proposer", player_name(obs.current_proposer()));
      slots.emplace_back("give", chips_phrase(c, offer->give_color, offer->give_qty));
      slots.emplace_back("get", chips_phrase(c, offer->get_color, offer->get_qty));
      slots.emplace_back("delta_surplus", format_signed_dollars(responder_delta(obs.own_values, *offer)));
      break;
  }
  return {role, std::string(templates::kRules) + "\n" + render(body, slots), temperature};
}

}  // namespace bargain::llm
