#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/game.hpp"
#include "bargain/llm/prompt.hpp"

namespace bargain::llm {

/// Malformed model output. `offset`/`length` locate the offending span in
/// the raw text.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::size_t length)
      : std::runtime_error(what), offset_(offset), length_(length) {}
  std::size_t offset() const { return offset_; }
  std::size_t length() const { return length_; }

 private:
  std::size_t offset_;
  std::size_t length_;
};

struct TagElement {
  std::string name;  // upper case
  std::string_view content;
  std::size_t offset = 0;  // of the opening tag
  std::size_t length = 0;  // through the end of the closing tag
  std::size_t content_offset = 0;
};

struct TaggedProposal {
  Offer offer;
  std::string reasoning;
};

struct TaggedReply {
  std::string reasoning;
  std::vector<TaggedProposal> proposals;  // proposer roles
  std::optional<Response> choice;         // responder role
};

inline constexpr std::size_t kMaxGeneratedProposals = 3;

namespace detail {

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct RawTag {
  std::string name;
  bool closing = false;
  std::size_t offset = 0;
  std::size_t length = 0;
};

// Recognises `<NAME>`, `</NAME>` and `<\NAME>` with optional inner spaces.
inline std::optional<RawTag> tag_at(std::string_view text, std::size_t pos) {
  std::size_t i = pos + 1;
  auto skip_ws = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  };
  skip_ws();
  bool closing = false;
  if (i < text.size() && (text[i] == '/' || text[i] == '\\')) {
    closing = true;
    ++i;
    skip_ws();
  }
  const std::size_t name_start = i;
  while (i < text.size() && (std::isalpha(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
  if (i == name_start) return std::nullopt;
  const std::size_t name_end = i;
  skip_ws();
  if (i >= text.size() || text[i] != '>') return std::nullopt;
  return RawTag{upper(text.substr(name_start, name_end - name_start)), closing, pos, i + 1 - pos};
}

}  // namespace detail

/// Splits text into top-level tag elements. An opening tag that meets
/// another opening tag (or the end) before its closing tag is an error;
/// stray closing tags are ignored.
inline std::vector<TagElement> scan_tags(std::string_view text) {
  std::vector<TagElement> out;
  std::optional<detail::RawTag> open;
  for (std::size_t pos = text.find('<'); pos != std::string_view::npos; pos = text.find('<', pos + 1)) {
    const auto tag = detail::tag_at(text, pos);
    if (!tag) continue;
    if (!tag->closing) {
      if (open) throw ParseError("unclosed <" + open->name + "> tag", open->offset, pos - open->offset);
      open = tag;
      continue;
    }
    if (open && tag->name == open->name) {
      const std::size_t cstart = open->offset + open->length;
      out.push_back({open->name, text.substr(cstart, tag->offset - cstart), open->offset,
                     tag->offset + tag->length - open->offset, cstart});
      open.reset();
    }
  }
  if (open) throw ParseError("unclosed <" + open->name + "> tag", open->offset, text.size() - open->offset);
  return out;
}

namespace detail {

inline int parse_color(const GameConfig& c, const TagElement& e) {
  std::string s = lower(trim(e.content));
  for (std::string_view suffix : {" chips", " chip"})
    if (s.size() > suffix.size() && s.ends_with(suffix)) {
      s.resize(s.size() - suffix.size());
      break;
    }
  s = std::string(trim(s));
  for (int k = 0; k < c.n_colors(); ++k)
    if (lower(c.colors[k]) == s) return k;
  throw ParseError("unknown color in <" + e.name + ">: '" + std::string(trim(e.content)) + "'", e.content_offset,
                   e.content.size());
}

inline int parse_qty(const TagElement& e) {
  const auto s = trim(e.content);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v <= 0)
    throw ParseError("quantity in <" + e.name + "> must be a positive integer: '" + std::string(s) + "'",
                     e.content_offset, e.content.size());
  return v;
}

inline const TagElement* first_named(const std::vector<TagElement>& els, std::string_view name) {
  for (const auto& e : els)
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace detail

/// Parses a model reply for `role`. Tags are case-insensitive, content is
/// whitespace-trimmed, REASONING and CHECK are optional. Refined-generate
/// replies yield up to three proposals in order; the other proposer roles
/// yield exactly one.
inline TaggedReply parse_reply(std::string_view text, PromptRole role, const GameConfig& config) {
  const auto els = scan_tags(text);
  TaggedReply reply;
  if (const auto* r = detail::first_named(els, "REASONING")) reply.reasoning = std::string(detail::trim(r->content));

  if (role == PromptRole::Responder) {
    const auto* c = detail::first_named(els, "CHOICE");
    if (!c) throw ParseError("missing <CHOICE> tag", 0, text.size());
    const auto v = detail::lower(detail::trim(c->content));
    if (v == "yes")
      reply.choice = Response::Accept;
    else if (v == "no")
      reply.choice = Response::Decline;
    else
      throw ParseError("<CHOICE> must be Yes or No: '" + std::string(detail::trim(c->content)) + "'",
                       c->content_offset, c->content.size());
    return reply;
  }

  // Group proposal fields; a group starts at each GET_COLOR.
  static constexpr std::string_view kFields[] = {"GET_COLOR", "GET_QUANTITY", "GIVE_COLOR", "GIVE_QUANTITY"};
  struct Group {
    const TagElement* f[4] = {nullptr, nullptr, nullptr, nullptr};
    std::string reasoning;
    std::size_t offset = 0;
  };
  std::vector<Group> groups;
  std::string pending_reasoning;
  for (const auto& e : els) {
    if (e.name == "REASONING") {
      pending_reasoning = std::string(detail::trim(e.content));
      continue;
    }
    const auto it = std::find(std::begin(kFields), std::end(kFields), e.name);
    if (it == std::end(kFields)) continue;
    const auto idx = static_cast<std::size_t>(it - std::begin(kFields));
    if (idx == 0 || groups.empty() || groups.back().f[idx]) {
      groups.emplace_back();
      groups.back().offset = e.offset;
      groups.back().reasoning = pending_reasoning;
    }
    groups.back().f[idx] = &e;
  }
  if (groups.empty()) throw ParseError("no trade tags found", 0, text.size());

  const std::size_t limit = role == PromptRole::RefinedGenerate ? kMaxGeneratedProposals : 1;
  for (std::size_t gi = 0; gi < groups.size() && gi < limit; ++gi) {
    const auto& g = groups[gi];
    for (std::size_t k = 0; k < 4; ++k)
      if (!g.f[k]) {
        const std::size_t end = gi + 1 < groups.size() ? groups[gi + 1].offset : text.size();
        throw ParseError("missing <" + std::string(kFields[k]) + "> tag", g.offset, end - g.offset);
      }
    const int get_color = detail::parse_color(config, *g.f[0]);
    const int get_qty = detail::parse_qty(*g.f[1]);
    const int give_color = detail::parse_color(config, *g.f[2]);
    const int give_qty = detail::parse_qty(*g.f[3]);
    reply.proposals.push_back({Offer::trade(give_color, give_qty, get_color, get_qty), g.reasoning});
  }
  return reply;
}

}  // namespace bargain::llm
