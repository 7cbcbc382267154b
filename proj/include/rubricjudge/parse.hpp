#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rubricjudge/core.hpp"

namespace rubricjudge {

// Parsing judge output never throws: malformed input maps to a typed error so
// a grading run can keep going.
enum class ParseErrorKind { MissingScore, UnknownLabel, MissingItem, DuplicateItem, StrayItem };

std::string_view parse_error_name(ParseErrorKind kind);

struct ParseError {
  ParseErrorKind kind;
  std::string message;
};

struct ParsedVerdict {
  Label label;
  std::string justification;
};

struct SingleParseResult {
  std::optional<ParsedVerdict> verdict;
  std::optional<ParseError> error;

  bool ok() const { return verdict.has_value(); }
};

struct ParseOptions {
  // Tolerant mode accepts prefix text, markdown emphasis and loose spacing
  // around "Score:"; strict mode requires the exact requested line format
  // (useful for audits).
  bool strict = false;
};

// Finds the first line carrying "Score:" (case-insensitive), resolves the
// label token after it (numeric code preferred over a name) and returns the
// remainder of that line plus any following lines as the justification.
SingleParseResult parse_single_response(std::string_view raw, SchemeId scheme,
                                        const ParseOptions& opts = {});

struct BatchParseResult {
  // One entry per expected id, in expected order. Unmatched ids carry
  // MissingItem (or MissingScore when no item line matched at all).
  std::vector<std::pair<std::string, SingleParseResult>> items;
  // Duplicate item numbers (first occurrence wins) and out-of-range indices.
  std::vector<ParseError> extras;

  const SingleParseResult* find(std::string_view id) const;
};

// Scans for "Item <n>:" lines; n maps positionally onto expected_ids[n-1] and
// each matched line is parsed like a single response confined to that line.
BatchParseResult parse_batch_response(std::string_view raw,
                                      std::span<const std::string> expected_ids, SchemeId scheme,
                                      const ParseOptions& opts = {});

}  // namespace rubricjudge
