#pragma once

#include <optional>
#include <string>

#include "rubricjudge/core.hpp"
#include "rubricjudge/parse.hpp"

namespace rubricjudge {

// Why a response carries no verdict: one of the parse error kinds, or a
// transport-level failure ("transport", "timeout") that never produced text.
struct ResponseError {
  std::string kind;
  std::string message;
};

inline ResponseError to_response_error(const ParseError& error) {
  return ResponseError{std::string(parse_error_name(error.kind)), error.message};
}

// One judge run for one item. Exactly one of `parsed` / `error` is set.
struct JudgeResponse {
  std::string item_id;
  int run_index = 0;
  std::string condition;  // e.g. "control@5way", "perturb:ocr@5way", "attack:naive@2way"
  SchemeId scheme = SchemeId::FiveWay;
  std::string raw_text;
  std::optional<ParsedVerdict> parsed;
  std::optional<ResponseError> error;
  double latency_ms = 0.0;
};

}  // namespace rubricjudge
