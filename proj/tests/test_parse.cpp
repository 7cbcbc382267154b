#include <string>
#include <vector>

#include "doctest.h"
#include "rubricjudge/parse.hpp"

using namespace rubricjudge;

namespace {

Label l5(int code) { return make_label(SchemeId::FiveWay, code); }

}  // namespace

TEST_CASE("parse: canonical single responses") {
  auto r = parse_single_response("Score: 2 - misses the energy-carrier detail.",
                                 SchemeId::FiveWay);
  REQUIRE(r.ok());
  CHECK(r.verdict->label == l5(2));
  CHECK(r.verdict->justification == "misses the energy-carrier detail.");

  auto by_name = parse_single_response("Score: contradictory - states the opposite.",
                                       SchemeId::ThreeWay);
  REQUIRE(by_name.ok());
  CHECK(by_name.verdict->label == make_label(SchemeId::ThreeWay, 1));

  auto multi_word =
      parse_single_response("Score: partially correct incomplete - lacks detail.",
                            SchemeId::FiveWay);
  REQUIRE(multi_word.ok());
  CHECK(multi_word.verdict->label == l5(2));
  CHECK(multi_word.verdict->justification == "lacks detail.");
}

TEST_CASE("parse: tolerant mode forgives chatter, markdown, and spacing") {
  SUBCASE("prefix text before the score line") {
    auto r = parse_single_response(
        "Let me evaluate this answer.\nScore: 0 - fully matches the reference.",
        SchemeId::FiveWay);
    REQUIRE(r.ok());
    CHECK(r.verdict->label == l5(0));
  }
  SUBCASE("inline lead-in on the same line") {
    auto r = parse_single_response("Final Score: 3 - off topic.", SchemeId::FiveWay);
    REQUIRE(r.ok());
    CHECK(r.verdict->label == l5(3));
  }
  SUBCASE("markdown emphasis around everything") {
    auto r = parse_single_response("**Score:** **1** - contradicts the reference.",
                                   SchemeId::FiveWay);
    REQUIRE(r.ok());
    CHECK(r.verdict->label == l5(1));
    auto r2 = parse_single_response("__Score__: *irrelevant* - not about the question.",
                                    SchemeId::FiveWay);
    REQUIRE(r2.ok());
    CHECK(r2.verdict->label == l5(3));
  }
  SUBCASE("loose spacing and case") {
    auto r = parse_single_response("score :  4  -  wrong subject area.", SchemeId::FiveWay);
    REQUIRE(r.ok());
    CHECK(r.verdict->label == l5(4));
    CHECK(r.verdict->justification == "wrong subject area.");
  }
  SUBCASE("multi-line justification keeps following lines") {
    auto r = parse_single_response("Score: 2 - first line.\nsecond line.\nthird.",
                                   SchemeId::FiveWay);
    REQUIRE(r.ok());
    CHECK(r.verdict->justification == "first line.\nsecond line.\nthird.");
  }
  SUBCASE("colon delimiter instead of dash") {
    auto r = parse_single_response("Score: 1: direct contradiction.", SchemeId::FiveWay);
    REQUIRE(r.ok());
    CHECK(r.verdict->label == l5(1));
    CHECK(r.verdict->justification == "direct contradiction.");
  }
  SUBCASE("bare label with no justification") {
    auto r = parse_single_response("Score: 0", SchemeId::TwoWay);
    REQUIRE(r.ok());
    CHECK(r.verdict->justification.empty());
  }
  SUBCASE("score inside a larger word does not trigger") {
    auto r = parse_single_response("The underscore: 3 is not a verdict", SchemeId::FiveWay);
    CHECK_FALSE(r.ok());
    CHECK(r.error->kind == ParseErrorKind::MissingScore);
  }
  SUBCASE("label followed by punctuation") {
    auto r = parse_single_response("Score: 2.", SchemeId::FiveWay);
    REQUIRE(r.ok());
    CHECK(r.verdict->label == l5(2));
  }
}

TEST_CASE("parse: malformed single responses map to typed errors") {
  auto missing = parse_single_response("This answer looks partially correct to me.",
                                       SchemeId::FiveWay);
  CHECK_FALSE(missing.ok());
  CHECK(missing.error->kind == ParseErrorKind::MissingScore);

  auto unknown = parse_single_response("Score: excellent - nice work.", SchemeId::FiveWay);
  CHECK_FALSE(unknown.ok());
  CHECK(unknown.error->kind == ParseErrorKind::UnknownLabel);

  auto out_of_range = parse_single_response("Score: 7 - impossible.", SchemeId::FiveWay);
  CHECK_FALSE(out_of_range.ok());
  CHECK(out_of_range.error->kind == ParseErrorKind::UnknownLabel);

  auto wrong_scheme = parse_single_response("Score: irrelevant - off topic.", SchemeId::TwoWay);
  CHECK_FALSE(wrong_scheme.ok());
  CHECK(wrong_scheme.error->kind == ParseErrorKind::UnknownLabel);

  auto empty = parse_single_response("", SchemeId::FiveWay);
  CHECK_FALSE(empty.ok());
  CHECK(empty.error->kind == ParseErrorKind::MissingScore);

  auto empty_token = parse_single_response("Score: - no label here.", SchemeId::FiveWay);
  CHECK_FALSE(empty_token.ok());
  CHECK(empty_token.error->kind == ParseErrorKind::UnknownLabel);
}

TEST_CASE("parse: strict mode accepts only the requested format") {
  ParseOptions strict{.strict = true};
  auto ok = parse_single_response("Score: 1 - contradicts.", SchemeId::FiveWay, strict);
  REQUIRE(ok.ok());
  CHECK(ok.verdict->label == l5(1));

  CHECK_FALSE(parse_single_response("Final Score: 1 - x.", SchemeId::FiveWay, strict).ok());
  CHECK_FALSE(parse_single_response("**Score:** 1 - x.", SchemeId::FiveWay, strict).ok());
  CHECK_FALSE(parse_single_response("score : 1 - x.", SchemeId::FiveWay, strict).ok());
  CHECK(parse_single_response("preamble\nScore: 1 - x.", SchemeId::FiveWay, strict).ok());
}

TEST_CASE("parse: numeric codes win over name lookup") {
  // "2" resolves as the code even though the justification mentions a name.
  auto r = parse_single_response("Score: 2 - arguably irrelevant.", SchemeId::FiveWay);
  REQUIRE(r.ok());
  CHECK(r.verdict->label == l5(2));
}

TEST_CASE("parse: batch responses map item numbers onto expected ids") {
  const std::vector<std::string> ids = {"alpha", "beta", "gamma"};
  const std::string raw =
      "Item 1: Score: 0 - matches.\n"
      "Item 2: Score: 3 - off topic.\n"
      "Item 3: Score: partially_correct_incomplete - half right.\n";
  auto r = parse_batch_response(raw, ids, SchemeId::FiveWay);
  REQUIRE(r.items.size() == 3);
  CHECK(r.extras.empty());
  CHECK(r.items[0].first == "alpha");
  CHECK(r.items[0].second.verdict->label == l5(0));
  CHECK(r.items[1].second.verdict->label == l5(3));
  CHECK(r.items[2].second.verdict->label == l5(2));
  CHECK(r.find("beta")->verdict->label == l5(3));
  CHECK(r.find("delta") == nullptr);
}

TEST_CASE("parse: batch tolerates markers and interleaved chatter") {
  const std::vector<std::string> ids = {"a", "b"};
  const std::string raw =
      "Here are my grades:\n"
      "- Item 1: Score: 1 - contradicts the reference.\n"
      "Some commentary in between.\n"
      "**Item 2**: Score: 0 - correct.\n";
  auto r = parse_batch_response(raw, ids, SchemeId::FiveWay);
  CHECK(r.items[0].second.verdict->label == l5(1));
  CHECK(r.items[1].second.verdict->label == l5(0));
  CHECK(r.extras.empty());
}

TEST_CASE("parse: batch duplicate, stray, and missing items") {
  const std::vector<std::string> ids = {"a", "b", "c"};

  SUBCASE("duplicates keep the first occurrence") {
    const std::string raw =
        "Item 1: Score: 0 - first.\n"
        "Item 1: Score: 4 - second.\n"
        "Item 2: Score: 1 - x.\n"
        "Item 3: Score: 2 - y.\n";
    auto r = parse_batch_response(raw, ids, SchemeId::FiveWay);
    REQUIRE(r.extras.size() == 1);
    CHECK(r.extras[0].kind == ParseErrorKind::DuplicateItem);
    CHECK(r.items[0].second.verdict->label == l5(0));
  }
  SUBCASE("out-of-range indices are stray") {
    const std::string raw =
        "Item 1: Score: 0 - x.\n"
        "Item 2: Score: 0 - x.\n"
        "Item 3: Score: 0 - x.\n"
        "Item 4: Score: 0 - x.\n"
        "Item 0: Score: 0 - x.\n";
    auto r = parse_batch_response(raw, ids, SchemeId::FiveWay);
    CHECK(r.extras.size() == 2);
    for (const auto& e : r.extras) CHECK(e.kind == ParseErrorKind::StrayItem);
  }
  SUBCASE("unmatched ids carry MissingItem when other lines matched") {
    const std::string raw = "Item 1: Score: 0 - x.\nItem 3: Score: 1 - y.\n";
    auto r = parse_batch_response(raw, ids, SchemeId::FiveWay);
    CHECK(r.items[0].second.ok());
    CHECK_FALSE(r.items[1].second.ok());
    CHECK(r.items[1].second.error->kind == ParseErrorKind::MissingItem);
    CHECK(r.items[2].second.ok());
  }
  SUBCASE("nothing matched at all reports MissingScore everywhere") {
    auto r = parse_batch_response("I refuse to grade these.", ids, SchemeId::FiveWay);
    for (const auto& [id, item] : r.items) {
      (void)id;
      CHECK_FALSE(item.ok());
      CHECK(item.error->kind == ParseErrorKind::MissingScore);
    }
  }
  SUBCASE("item line without a score segment") {
    const std::string raw = "Item 1: looks fine to me\nItem 2: Score: 0 - x.\n";
    auto r = parse_batch_response(raw, {ids.data(), 2}, SchemeId::FiveWay);
    CHECK_FALSE(r.items[0].second.ok());
    CHECK(r.items[0].second.error->kind == ParseErrorKind::MissingScore);
    CHECK(r.items[1].second.ok());
  }
  SUBCASE("item line with an unknown label") {
    const std::string raw = "Item 1: Score: maybe - unsure.\nItem 2: Score: 1 - x.\n";
    auto r = parse_batch_response(raw, {ids.data(), 2}, SchemeId::FiveWay);
    CHECK_FALSE(r.items[0].second.ok());
    CHECK(r.items[0].second.error->kind == ParseErrorKind::UnknownLabel);
  }
}

TEST_CASE("parse: error kinds serialize to stable names") {
  CHECK(parse_error_name(ParseErrorKind::MissingScore) == "missing_score");
  CHECK(parse_error_name(ParseErrorKind::UnknownLabel) == "unknown_label");
  CHECK(parse_error_name(ParseErrorKind::MissingItem) == "missing_item");
  CHECK(parse_error_name(ParseErrorKind::DuplicateItem) == "duplicate_item");
  CHECK(parse_error_name(ParseErrorKind::StrayItem) == "stray_item");
}

TEST_CASE("parse: round-trips the mock backend's output shape") {
  for (int code = 0; code < 5; ++code) {
    const std::string raw =
        "Score: " + std::to_string(code) + " - mock justification.";
    auto r = parse_single_response(raw, SchemeId::FiveWay);
    REQUIRE(r.ok());
    CHECK(r.verdict->label.code == code);
    CHECK(r.verdict->justification == "mock justification.");
  }
}
