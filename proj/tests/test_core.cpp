#include <stdexcept>

#include "doctest.h"
#include "rubricjudge/core.hpp"

using namespace rubricjudge;

TEST_CASE("core: scheme cardinality and names") {
  CHECK(cardinality(SchemeId::TwoWay) == 2);
  CHECK(cardinality(SchemeId::ThreeWay) == 3);
  CHECK(cardinality(SchemeId::FiveWay) == 5);
  CHECK(scheme_name(SchemeId::TwoWay) == "2way");
  CHECK(scheme_name(SchemeId::ThreeWay) == "3way");
  CHECK(scheme_name(SchemeId::FiveWay) == "5way");
  CHECK(scheme_from_name("5way") == SchemeId::FiveWay);
  CHECK(scheme_from_name("3way") == SchemeId::ThreeWay);
  CHECK(scheme_from_name("2way") == SchemeId::TwoWay);
  CHECK_FALSE(scheme_from_name("4way").has_value());
  CHECK_FALSE(scheme_from_name("").has_value());
  CHECK(require_scheme("5way") == SchemeId::FiveWay);
  CHECK_THROWS_AS(require_scheme("6way"), std::invalid_argument);
}

TEST_CASE("core: label names follow the fixed code tables") {
  CHECK(make_label(SchemeId::FiveWay, 0).name() == "correct");
  CHECK(make_label(SchemeId::FiveWay, 1).name() == "contradictory");
  CHECK(make_label(SchemeId::FiveWay, 2).name() == "partially_correct_incomplete");
  CHECK(make_label(SchemeId::FiveWay, 3).name() == "irrelevant");
  CHECK(make_label(SchemeId::FiveWay, 4).name() == "non_domain");
  CHECK(make_label(SchemeId::ThreeWay, 0).name() == "correct");
  CHECK(make_label(SchemeId::ThreeWay, 1).name() == "contradictory");
  CHECK(make_label(SchemeId::ThreeWay, 2).name() == "incorrect");
  CHECK(make_label(SchemeId::TwoWay, 0).name() == "correct");
  CHECK(make_label(SchemeId::TwoWay, 1).name() == "incorrect");
}

TEST_CASE("core: make_label rejects out-of-range codes") {
  CHECK_THROWS_AS(make_label(SchemeId::TwoWay, 2), UnknownLabel);
  CHECK_THROWS_AS(make_label(SchemeId::FiveWay, 5), UnknownLabel);
  CHECK_THROWS_AS(make_label(SchemeId::FiveWay, -1), UnknownLabel);
}

TEST_CASE("core: all_labels enumerates codes in order") {
  auto labels = all_labels(SchemeId::ThreeWay);
  REQUIRE(labels.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(labels[static_cast<std::size_t>(i)].code == i);
    CHECK(labels[static_cast<std::size_t>(i)].scheme == SchemeId::ThreeWay);
  }
}

TEST_CASE("core: label parsing accepts codes and names") {
  CHECK(parse_label("0", SchemeId::FiveWay) == make_label(SchemeId::FiveWay, 0));
  CHECK(parse_label("4", SchemeId::FiveWay) == make_label(SchemeId::FiveWay, 4));
  CHECK(parse_label("correct", SchemeId::TwoWay) == make_label(SchemeId::TwoWay, 0));
  CHECK(parse_label("Contradictory", SchemeId::ThreeWay) == make_label(SchemeId::ThreeWay, 1));
  CHECK(parse_label("NON_DOMAIN", SchemeId::FiveWay) == make_label(SchemeId::FiveWay, 4));

  SUBCASE("space, underscore, and hyphen runs are interchangeable") {
    auto partial = make_label(SchemeId::FiveWay, 2);
    CHECK(parse_label("partially_correct_incomplete", SchemeId::FiveWay) == partial);
    CHECK(parse_label("partially correct incomplete", SchemeId::FiveWay) == partial);
    CHECK(parse_label("Partially-Correct-Incomplete", SchemeId::FiveWay) == partial);
    CHECK(parse_label("partially  correct __ incomplete", SchemeId::FiveWay) == partial);
    CHECK(parse_label("non domain", SchemeId::FiveWay) == make_label(SchemeId::FiveWay, 4));
  }

  SUBCASE("unknown tokens and out-of-scheme codes fail") {
    CHECK_FALSE(try_parse_label("5", SchemeId::FiveWay).has_value());
    CHECK_FALSE(try_parse_label("2", SchemeId::TwoWay).has_value());
    CHECK_FALSE(try_parse_label("irrelevant", SchemeId::ThreeWay).has_value());
    CHECK_FALSE(try_parse_label("partially", SchemeId::FiveWay).has_value());
    CHECK_FALSE(try_parse_label("", SchemeId::FiveWay).has_value());
    CHECK_FALSE(try_parse_label("-1", SchemeId::FiveWay).has_value());
    CHECK_THROWS_AS(parse_label("bogus", SchemeId::FiveWay), UnknownLabel);
  }
}

TEST_CASE("core: collapse maps finer schemes onto coarser ones") {
  SUBCASE("5-way to 3-way") {
    CHECK(collapse(make_label(SchemeId::FiveWay, 0), SchemeId::ThreeWay).code == 0);
    CHECK(collapse(make_label(SchemeId::FiveWay, 1), SchemeId::ThreeWay).code == 1);
    CHECK(collapse(make_label(SchemeId::FiveWay, 2), SchemeId::ThreeWay).code == 2);
    CHECK(collapse(make_label(SchemeId::FiveWay, 3), SchemeId::ThreeWay).code == 2);
    CHECK(collapse(make_label(SchemeId::FiveWay, 4), SchemeId::ThreeWay).code == 2);
  }
  SUBCASE("3-way to 2-way keeps only correct") {
    CHECK(collapse(make_label(SchemeId::ThreeWay, 0), SchemeId::TwoWay).code == 0);
    CHECK(collapse(make_label(SchemeId::ThreeWay, 1), SchemeId::TwoWay).code == 1);
    CHECK(collapse(make_label(SchemeId::ThreeWay, 2), SchemeId::TwoWay).code == 1);
  }
  SUBCASE("5-way to 2-way composes both steps") {
    CHECK(collapse(make_label(SchemeId::FiveWay, 0), SchemeId::TwoWay).code == 0);
    for (int c = 1; c <= 4; ++c) {
      CHECK(collapse(make_label(SchemeId::FiveWay, c), SchemeId::TwoWay).code == 1);
    }
  }
  SUBCASE("identity and invalid directions") {
    auto l = make_label(SchemeId::ThreeWay, 1);
    CHECK(collapse(l, SchemeId::ThreeWay) == l);
    CHECK_THROWS_AS(collapse(make_label(SchemeId::TwoWay, 0), SchemeId::FiveWay), InvalidCollapse);
    CHECK_THROWS_AS(collapse(make_label(SchemeId::ThreeWay, 0), SchemeId::FiveWay),
                    InvalidCollapse);
  }
}

TEST_CASE("core: gold_for collapses from the finest native gold") {
  GradingItem item;
  item.id = "x";
  item.question = "q";
  item.reference_answer = "r";
  item.student_answer = "s";

  SUBCASE("missing gold is empty") {
    CHECK_FALSE(gold_for(item, SchemeId::FiveWay).has_value());
    CHECK_FALSE(gold_for(item, SchemeId::TwoWay).has_value());
  }
  SUBCASE("5-way gold serves all three schemes") {
    item.gold[SchemeId::FiveWay] = make_label(SchemeId::FiveWay, 3);
    CHECK(gold_for(item, SchemeId::FiveWay)->code == 3);
    CHECK(gold_for(item, SchemeId::ThreeWay)->code == 2);
    CHECK(gold_for(item, SchemeId::TwoWay)->code == 1);
  }
  SUBCASE("native coarse gold wins over collapsing") {
    item.gold[SchemeId::FiveWay] = make_label(SchemeId::FiveWay, 2);
    item.gold[SchemeId::ThreeWay] = make_label(SchemeId::ThreeWay, 0);
    CHECK(gold_for(item, SchemeId::ThreeWay)->code == 0);
  }
  SUBCASE("coarse gold cannot serve a finer scheme") {
    item.gold[SchemeId::TwoWay] = make_label(SchemeId::TwoWay, 0);
    CHECK(gold_for(item, SchemeId::TwoWay)->code == 0);
    CHECK_FALSE(gold_for(item, SchemeId::FiveWay).has_value());
    CHECK_FALSE(gold_for(item, SchemeId::ThreeWay).has_value());
  }
}

TEST_CASE("core: labels order by scheme then code") {
  CHECK(make_label(SchemeId::FiveWay, 1) < make_label(SchemeId::FiveWay, 2));
  CHECK(make_label(SchemeId::FiveWay, 0) == make_label(SchemeId::FiveWay, 0));
  CHECK(make_label(SchemeId::TwoWay, 0) != make_label(SchemeId::FiveWay, 0));
}
