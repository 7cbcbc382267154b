#include "rubricjudge/core.hpp"

#include <array>
#include <cctype>

namespace rubricjudge {
namespace {

constexpr std::array<std::string_view, 2> kTwoWayNames = {"correct", "incorrect"};
constexpr std::array<std::string_view, 3> kThreeWayNames = {"correct", "contradictory",
                                                            "incorrect"};
constexpr std::array<std::string_view, 5> kFiveWayNames = {
    "correct", "contradictory", "partially_correct_incomplete", "irrelevant", "non_domain"};

// Lowercase; any run of space/underscore/hyphen becomes a single '_'.
std::string normalize_name(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_sep = false;
  for (char ch : text) {
    if (ch == ' ' || ch == '_' || ch == '-' || ch == '\t') {
      if (!out.empty()) pending_sep = true;
      continue;
    }
    if (pending_sep) {
      out.push_back('_');
      pending_sep = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

}  // namespace

int cardinality(SchemeId scheme) {
  switch (scheme) {
    case SchemeId::TwoWay:
      return 2;
    case SchemeId::ThreeWay:
      return 3;
    case SchemeId::FiveWay:
      return 5;
  }
  return 0;
}

std::string_view scheme_name(SchemeId scheme) {
  switch (scheme) {
    case SchemeId::TwoWay:
      return "2way";
    case SchemeId::ThreeWay:
      return "3way";
    case SchemeId::FiveWay:
      return "5way";
  }
  return "";
}

std::optional<SchemeId> scheme_from_name(std::string_view name) {
  if (name == "2way" || name == "2" || name == "two_way") return SchemeId::TwoWay;
  if (name == "3way" || name == "3" || name == "three_way") return SchemeId::ThreeWay;
  if (name == "5way" || name == "5" || name == "five_way") return SchemeId::FiveWay;
  return std::nullopt;
}

SchemeId require_scheme(std::string_view name) {
  const std::optional<SchemeId> scheme = scheme_from_name(name);
  if (!scheme) throw std::invalid_argument("unknown scheme name: " + std::string(name));
  return *scheme;
}

std::string_view Label::name() const {
  switch (scheme) {
    case SchemeId::TwoWay:
      return kTwoWayNames[static_cast<std::size_t>(code)];
    case SchemeId::ThreeWay:
      return kThreeWayNames[static_cast<std::size_t>(code)];
    case SchemeId::FiveWay:
      return kFiveWayNames[static_cast<std::size_t>(code)];
  }
  return "";
}

Label make_label(SchemeId scheme, int code) {
  if (code < 0 || code >= cardinality(scheme)) {
    throw UnknownLabel("label code " + std::to_string(code) + " out of range for scheme " +
                       std::string(scheme_name(scheme)));
  }
  return Label{scheme, code};
}

std::vector<Label> all_labels(SchemeId scheme) {
  std::vector<Label> out;
  for (int c = 0; c < cardinality(scheme); ++c) out.push_back(Label{scheme, c});
  return out;
}

std::optional<Label> try_parse_label(std::string_view text, SchemeId scheme) {
  if (text.empty()) return std::nullopt;

  bool all_digits = true;
  for (char ch : text) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) {
      all_digits = false;
      break;
    }
  }
  if (all_digits && text.size() <= 2) {
    int code = 0;
    for (char ch : text) code = code * 10 + (ch - '0');
    if (code < cardinality(scheme)) return Label{scheme, code};
    return std::nullopt;
  }

  const std::string norm = normalize_name(text);
  for (const Label& label : all_labels(scheme)) {
    if (norm == label.name()) return label;
  }
  return std::nullopt;
}

Label parse_label(std::string_view text, SchemeId scheme) {
  if (auto label = try_parse_label(text, scheme)) return *label;
  throw UnknownLabel("unknown label \"" + std::string(text) + "\" for scheme " +
                     std::string(scheme_name(scheme)));
}

Label collapse(const Label& label, SchemeId target) {
  const int src_card = cardinality(label.scheme);
  const int dst_card = cardinality(target);
  if (src_card < dst_card) {
    throw InvalidCollapse("cannot collapse " + std::string(scheme_name(label.scheme)) + " to finer " +
                          std::string(scheme_name(target)));
  }
  if (label.scheme == target) return label;

  if (label.scheme == SchemeId::FiveWay && target == SchemeId::ThreeWay) {
    switch (label.code) {
      case 0:
        return Label{target, 0};  // correct
      case 1:
        return Label{target, 1};  // contradictory
      default:
        return Label{target, 2};  // incorrect
    }
  }
  if (label.scheme == SchemeId::ThreeWay && target == SchemeId::TwoWay) {
    return Label{target, label.code == 0 ? 0 : 1};
  }
  if (label.scheme == SchemeId::FiveWay && target == SchemeId::TwoWay) {
    return collapse(collapse(label, SchemeId::ThreeWay), SchemeId::TwoWay);
  }
  throw InvalidCollapse("no collapse path from " + std::string(scheme_name(label.scheme)) + " to " +
                        std::string(scheme_name(target)));
}

std::optional<Label> gold_for(const GradingItem& item, SchemeId scheme) {
  if (auto it = item.gold.find(scheme); it != item.gold.end()) return it->second;
  // Prefer the finest native gold that can collapse onto `scheme`.
  static constexpr SchemeId kFinestFirst[] = {SchemeId::FiveWay, SchemeId::ThreeWay,
                                              SchemeId::TwoWay};
  for (SchemeId native : kFinestFirst) {
    auto it = item.gold.find(native);
    if (it == item.gold.end()) continue;
    if (cardinality(native) >= cardinality(scheme)) return collapse(it->second, scheme);
  }
  return std::nullopt;
}

}  // namespace rubricjudge
