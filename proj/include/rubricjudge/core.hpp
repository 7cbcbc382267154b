#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rubricjudge {

// Grading label schemes. Numeric codes are fixed:
//   5-way: 0=correct, 1=contradictory, 2=partially_correct_incomplete,
//          3=irrelevant, 4=non_domain
//   3-way: 0=correct, 1=contradictory, 2=incorrect
//   2-way: 0=correct, 1=incorrect
enum class SchemeId { TwoWay, ThreeWay, FiveWay };

int cardinality(SchemeId scheme);

// "2way" / "3way" / "5way"
std::string_view scheme_name(SchemeId scheme);
std::optional<SchemeId> scheme_from_name(std::string_view name);
SchemeId require_scheme(std::string_view name);  // throws std::invalid_argument

struct Label {
  SchemeId scheme;
  int code;

  std::string_view name() const;

  friend bool operator==(const Label&, const Label&) = default;
  friend auto operator<=>(const Label&, const Label&) = default;
};

Label make_label(SchemeId scheme, int code);
std::vector<Label> all_labels(SchemeId scheme);

struct UnknownLabel : std::runtime_error {
  explicit UnknownLabel(const std::string& what) : std::runtime_error(what) {}
};
struct InvalidCollapse : std::runtime_error {
  explicit InvalidCollapse(const std::string& what) : std::runtime_error(what) {}
};

// Resolves a trimmed label token, either as decimal code digits or as the
// canonical name (case-insensitive; runs of space/underscore/hyphen are
// interchangeable).
std::optional<Label> try_parse_label(std::string_view text, SchemeId scheme);
Label parse_label(std::string_view text, SchemeId scheme);  // throws UnknownLabel

// Maps a label onto a coarser scheme. 5-way -> 3-way keeps correct and
// contradictory, everything else becomes incorrect; 3-way -> 2-way keeps
// correct only. Identity when schemes match; throws InvalidCollapse when the
// target is finer than the source.
Label collapse(const Label& label, SchemeId target);

struct GradingItem {
  std::string id;
  std::string question;
  std::string reference_answer;
  std::string student_answer;
  std::map<SchemeId, Label> gold;

  friend bool operator==(const GradingItem&, const GradingItem&) = default;
};

// Gold label for `scheme`, collapsing from a finer native gold when needed.
std::optional<Label> gold_for(const GradingItem& item, SchemeId scheme);

}  // namespace rubricjudge
