#include "rubricjudge/parse.hpp"

#include <cctype>

namespace rubricjudge {
namespace {

bool iequal_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) != word[i]) return false;
  }
  return true;
}

bool is_emphasis(char ch) { return ch == '*' || ch == '_'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Strips emphasis, quotes, brackets and trailing punctuation off a token.
std::string_view strip_token(std::string_view token) {
  constexpr std::string_view kJunk = " \t*_`'\"()[]{}.,;!";
  while (!token.empty() && kJunk.find(token.front()) != std::string_view::npos)
    token.remove_prefix(1);
  while (!token.empty() && kJunk.find(token.back()) != std::string_view::npos)
    token.remove_suffix(1);
  return token;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

// Locates "score" + optional emphasis/space + ':' inside a line; returns the
// position right after the colon, or npos.
std::size_t find_score_colon(std::string_view line, bool strict) {
  if (strict) {
    if (iequal_at(line, 0, "score") && line.size() > 5 && line[5] == ':') return 6;
    return std::string_view::npos;
  }
  for (std::size_t pos = 0; pos + 6 <= line.size(); ++pos) {
    if (!iequal_at(line, pos, "score")) continue;
    // "score" must not sit inside a larger word ("underscore", "scores").
    if (pos > 0 && std::isalnum(static_cast<unsigned char>(line[pos - 1]))) continue;
    std::size_t after = pos + 5;
    while (after < line.size() && (line[after] == ' ' || is_emphasis(line[after]))) ++after;
    if (after < line.size() && line[after] == ':') return after + 1;
  }
  return std::string_view::npos;
}

// Parses "<label token> [delimiter justification]" starting right after the
// colon. The token runs greedily up to " - ", ':' or end of line.
SingleParseResult parse_score_tail(std::string_view tail, std::string_view following_lines,
                                   SchemeId scheme) {
  std::size_t start = 0;
  while (start < tail.size() && (tail[start] == ' ' || is_emphasis(tail[start]))) ++start;

  std::size_t token_end = tail.size();
  std::size_t just_start = tail.size();
  for (std::size_t i = start; i < tail.size(); ++i) {
    if (tail[i] == ':') {
      token_end = i;
      just_start = i + 1;
      break;
    }
    if (tail[i] == '-' && i > start && tail[i - 1] == ' ' && i + 1 < tail.size() &&
        tail[i + 1] == ' ') {
      token_end = i - 1;
      just_start = i + 2;
      break;
    }
  }

  const std::string_view token = strip_token(tail.substr(start, token_end - start));

  SingleParseResult result;
  std::optional<Label> label;
  if (!token.empty() && std::isdigit(static_cast<unsigned char>(token.front()))) {
    std::size_t digits = 1;
    while (digits < token.size() && std::isdigit(static_cast<unsigned char>(token[digits])))
      ++digits;
    label = try_parse_label(token.substr(0, digits), scheme);
  } else {
    label = try_parse_label(token, scheme);
  }
  if (!label) {
    result.error = ParseError{ParseErrorKind::UnknownLabel,
                              "unresolvable label token \"" + std::string(token) + "\""};
    return result;
  }

  std::string justification(trim(tail.substr(just_start)));
  if (!following_lines.empty()) {
    if (!justification.empty()) justification.push_back('\n');
    justification += trim(following_lines);
  }
  result.verdict = ParsedVerdict{*label, std::move(justification)};
  return result;
}

// Matches "Item <n>:" at the start of a line (tolerant of list markers and
// emphasis); returns the number and the position after the colon.
std::optional<std::pair<long, std::size_t>> match_item_header(std::string_view line, bool strict) {
  std::size_t pos = 0;
  if (strict) {
    if (!iequal_at(line, 0, "item")) return std::nullopt;
    pos = 4;
  } else {
    while (pos < line.size() &&
           (line[pos] == ' ' || line[pos] == '\t' || is_emphasis(line[pos]) || line[pos] == '-' ||
            line[pos] == '>' || line[pos] == '#'))
      ++pos;
    if (!iequal_at(line, pos, "item")) return std::nullopt;
    pos += 4;
  }
  if (pos >= line.size() || line[pos] != ' ') return std::nullopt;
  while (pos < line.size() && line[pos] == ' ') ++pos;
  if (pos >= line.size() || !std::isdigit(static_cast<unsigned char>(line[pos]))) {
    return std::nullopt;
  }
  long n = 0;
  while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) {
    n = n * 10 + (line[pos] - '0');
    ++pos;
  }
  if (!strict) {
    while (pos < line.size() && (line[pos] == ' ' || is_emphasis(line[pos]))) ++pos;
  }
  if (pos >= line.size() || line[pos] != ':') return std::nullopt;
  return std::make_pair(n, pos + 1);
}

}  // namespace

std::string_view parse_error_name(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::MissingScore:
      return "missing_score";
    case ParseErrorKind::UnknownLabel:
      return "unknown_label";
    case ParseErrorKind::MissingItem:
      return "missing_item";
    case ParseErrorKind::DuplicateItem:
      return "duplicate_item";
    case ParseErrorKind::StrayItem:
      return "stray_item";
  }
  return "";
}

SingleParseResult parse_single_response(std::string_view raw, SchemeId scheme,
                                        const ParseOptions& opts) {
  const auto lines = split_lines(raw);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t after_colon = find_score_colon(lines[i], opts.strict);
    if (after_colon == std::string_view::npos) continue;
    std::string_view following;
    if (i + 1 < lines.size()) {
      const std::size_t offset =
          static_cast<std::size_t>(lines[i + 1].data() - raw.data());
      following = raw.substr(offset);
    }
    return parse_score_tail(lines[i].substr(after_colon), following, scheme);
  }
  SingleParseResult result;
  result.error = ParseError{ParseErrorKind::MissingScore, "no \"Score:\" line found"};
  return result;
}

const SingleParseResult* BatchParseResult::find(std::string_view id) const {
  for (const auto& [item_id, result] : items) {
    if (item_id == id) return &result;
  }
  return nullptr;
}

BatchParseResult parse_batch_response(std::string_view raw,
                                      std::span<const std::string> expected_ids, SchemeId scheme,
                                      const ParseOptions& opts) {
  BatchParseResult result;
  std::vector<std::optional<SingleParseResult>> slots(expected_ids.size());
  std::size_t matched = 0;

  for (std::string_view line : split_lines(raw)) {
    const auto header = match_item_header(line, opts.strict);
    if (!header) continue;
    const auto [n, after_colon] = *header;
    if (n < 1 || static_cast<std::size_t>(n) > expected_ids.size()) {
      result.extras.push_back(
          ParseError{ParseErrorKind::StrayItem, "item index " + std::to_string(n) +
                                                    " outside 1.." +
                                                    std::to_string(expected_ids.size())});
      continue;
    }
    const std::size_t slot = static_cast<std::size_t>(n) - 1;
    if (slots[slot].has_value()) {
      result.extras.push_back(ParseError{
          ParseErrorKind::DuplicateItem,
          "duplicate line for item " + std::to_string(n) + " (" + expected_ids[slot] + ")"});
      continue;
    }
    ++matched;
    std::string_view tail = line.substr(after_colon);
    const std::size_t score_pos = find_score_colon(tail, opts.strict);
    if (score_pos == std::string_view::npos) {
      SingleParseResult item;
      item.error = ParseError{ParseErrorKind::MissingScore,
                              "item line has no \"Score:\" segment"};
      slots[slot] = std::move(item);
    } else {
      slots[slot] = parse_score_tail(tail.substr(score_pos), {}, scheme);
    }
  }

  for (std::size_t i = 0; i < expected_ids.size(); ++i) {
    if (slots[i].has_value()) {
      result.items.emplace_back(expected_ids[i], std::move(*slots[i]));
    } else {
      SingleParseResult missing;
      missing.error =
          matched == 0
              ? ParseError{ParseErrorKind::MissingScore, "no item lines matched in response"}
              : ParseError{ParseErrorKind::MissingItem,
                           "no line for item " + std::to_string(i + 1)};
      result.items.emplace_back(expected_ids[i], std::move(missing));
    }
  }
  return result;
}

}  // namespace rubricjudge
