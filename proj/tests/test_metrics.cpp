#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "rubricjudge/metrics.hpp"
#include "rubricjudge/rng.hpp"

using namespace rubricjudge;

namespace {

std::vector<Label> labels_of(SchemeId scheme, const std::vector<int>& codes) {
  std::vector<Label> out;
  for (int c : codes) out.push_back(make_label(scheme, c));
  return out;
}

// Independent rank-then-Pearson oracle, written against the textbook
// definition rather than the library's helpers.
std::vector<double> oracle_ranks(const std::vector<int>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double below = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++below;
      if (v[j] == v[i]) ++equal;
    }
    ranks[i] = below + (equal + 1.0) / 2.0;
  }
  return ranks;
}

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("metrics: confusion matrix is gold rows by prediction columns") {
  auto preds = labels_of(SchemeId::ThreeWay, {0, 1, 2, 0, 0});
  auto golds = labels_of(SchemeId::ThreeWay, {0, 1, 1, 2, 0});
  auto m = confusion_matrix(preds, golds);
  REQUIRE(m.size() == 3);
  CHECK(m[0][0] == 2);
  CHECK(m[1][1] == 1);
  CHECK(m[1][2] == 1);
  CHECK(m[2][0] == 1);
  int total = 0;
  for (const auto& row : m) {
    for (int v : row) total += v;
  }
  CHECK(total == 5);
}

TEST_CASE("metrics: input validation") {
  auto a = labels_of(SchemeId::TwoWay, {0, 1});
  auto b = labels_of(SchemeId::TwoWay, {0});
  CHECK_THROWS_AS(accuracy(a, b), LengthMismatch);
  CHECK_THROWS_AS(accuracy(std::vector<Label>{}, std::vector<Label>{}), LengthMismatch);

  auto c = labels_of(SchemeId::ThreeWay, {0, 1});
  CHECK_THROWS_AS(accuracy(a, c), SchemeMismatch);
  CHECK_THROWS_AS(cohen_kappa(c, a), SchemeMismatch);
}

TEST_CASE("metrics: accuracy is the hit fraction") {
  auto preds = labels_of(SchemeId::FiveWay, {0, 1, 2, 3, 4});
  auto golds = labels_of(SchemeId::FiveWay, {0, 1, 0, 0, 4});
  CHECK(accuracy(preds, golds) == doctest::Approx(0.6));
  CHECK(accuracy(preds, preds) == 1.0);
}

TEST_CASE("metrics: kappa corrects for chance agreement") {
  SUBCASE("50 percent raw agreement at chance level is zero") {
    auto preds = labels_of(SchemeId::TwoWay, {0, 0, 1, 1});
    auto golds = labels_of(SchemeId::TwoWay, {0, 1, 0, 1});
    CHECK(accuracy(preds, golds) == doctest::Approx(0.5));
    CHECK(cohen_kappa(preds, golds) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("textbook value 0.4") {
    // Confusion [[20, 5], [10, 15]]: p_o = 0.7, p_e = 0.5.
    std::vector<int> pc, gc;
    auto add = [&](int gold, int pred, int count) {
      for (int i = 0; i < count; ++i) {
        gc.push_back(gold);
        pc.push_back(pred);
      }
    };
    add(0, 0, 20);
    add(0, 1, 5);
    add(1, 0, 10);
    add(1, 1, 15);
    CHECK(cohen_kappa(labels_of(SchemeId::TwoWay, pc), labels_of(SchemeId::TwoWay, gc)) ==
          doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("perfect agreement is one even when p_e is one") {
    auto same = labels_of(SchemeId::ThreeWay, {1, 1, 1, 1});
    CHECK(cohen_kappa(same, same) == 1.0);
    auto spread = labels_of(SchemeId::ThreeWay, {0, 1, 2, 0});
    CHECK(cohen_kappa(spread, spread) == doctest::Approx(1.0));
  }
  SUBCASE("systematic disagreement goes negative") {
    auto preds = labels_of(SchemeId::TwoWay, {1, 1, 0, 0});
    auto golds = labels_of(SchemeId::TwoWay, {0, 0, 1, 1});
    CHECK(cohen_kappa(preds, golds) == doctest::Approx(-1.0));
  }
}

TEST_CASE("metrics: spearman matches rank-then-Pearson on random vectors") {
  CounterRng rng = CounterRng::keyed({"spearman-prop"});
  int compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.next_below(60);
    std::vector<int> pc(n), gc(n);
    for (std::size_t i = 0; i < n; ++i) {
      pc[i] = static_cast<int>(rng.next_below(5));
      gc[i] = static_cast<int>(rng.next_below(5));
    }
    const bool pc_const = std::all_of(pc.begin(), pc.end(), [&](int v) { return v == pc[0]; });
    const bool gc_const = std::all_of(gc.begin(), gc.end(), [&](int v) { return v == gc[0]; });
    if (pc_const || gc_const) continue;
    const double expect = oracle_pearson(oracle_ranks(pc), oracle_ranks(gc));
    CHECK(spearman(pc, gc) == doctest::Approx(expect).epsilon(1e-12));
    ++compared;
  }
  CHECK(compared > 90);
}

TEST_CASE("metrics: spearman known values and edge cases") {
  std::vector<int> up = {0, 1, 2, 3, 4};
  std::vector<int> down = {4, 3, 2, 1, 0};
  CHECK(spearman(up, up) == doctest::Approx(1.0));
  CHECK(spearman(up, down) == doctest::Approx(-1.0));

  std::vector<int> constant = {2, 2, 2};
  std::vector<int> three = {0, 1, 2};
  CHECK_THROWS_AS(spearman(constant, three), ConstantInput);
  CHECK_THROWS_AS(spearman(three, constant), ConstantInput);

  std::vector<int> one = {1};
  CHECK_THROWS_AS(spearman(one, one), LengthMismatch);
  CHECK_THROWS_AS(spearman(up, three), LengthMismatch);
}

TEST_CASE("metrics: wilson interval matches the closed form") {
  // z for 95 percent two-sided coverage.
  const double z = 1.959963984540054;
  auto [lo, hi] = wilson_interval(90, 100, 0.95);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / 100.0;
  const double center = (0.9 + z2 / 200.0) / denom;
  const double half = (z / denom) * std::sqrt(0.9 * 0.1 / 100.0 + z2 / (4.0 * 100.0 * 100.0));
  CHECK(lo == doctest::Approx(center - half).epsilon(1e-9));
  CHECK(hi == doctest::Approx(center + half).epsilon(1e-9));
  CHECK(lo > 0.82);
  CHECK(hi < 0.95);

  SUBCASE("boundaries clamp exactly") {
    auto [l0, h0] = wilson_interval(0, 10, 0.95);
    CHECK(l0 == 0.0);
    CHECK(h0 > 0.0);
    CHECK(h0 < 1.0);
    auto [ln, hn] = wilson_interval(10, 10, 0.95);
    CHECK(hn == 1.0);
    CHECK(ln < 1.0);
    CHECK(ln > 0.0);
  }
  SUBCASE("interval brackets the point estimate") {
    auto [l, h] = wilson_interval(7, 20, 0.95);
    CHECK(l < 0.35);
    CHECK(h > 0.35);
  }
  SUBCASE("wider confidence widens the interval") {
    auto [l95, h95] = wilson_interval(50, 80, 0.95);
    auto [l99, h99] = wilson_interval(50, 80, 0.99);
    CHECK(l99 < l95);
    CHECK(h99 > h95);
  }
  SUBCASE("invalid counts") {
    CHECK_THROWS_AS(wilson_interval(1, 0, 0.95), InvalidCount);
    CHECK_THROWS_AS(wilson_interval(11, 10, 0.95), InvalidCount);
    CHECK_THROWS_AS(wilson_interval(5, 10, 0.0), InvalidCount);
    CHECK_THROWS_AS(wilson_interval(5, 10, 1.0), InvalidCount);
  }
}

TEST_CASE("metrics: bootstrap replays draw for draw from the documented keys") {
  CounterRng data_rng = CounterRng::keyed({"bootstrap-fixture"});
  const std::size_t n = 40;
  std::vector<Label> preds, golds;
  for (std::size_t i = 0; i < n; ++i) {
    preds.push_back(make_label(SchemeId::ThreeWay, static_cast<int>(data_rng.next_below(3))));
    golds.push_back(make_label(SchemeId::ThreeWay, static_cast<int>(data_rng.next_below(3))));
  }
  const std::uint64_t seed = 99;
  const int resamples = 200;

  // Reimplementation from the documented recipe: resample b draws its indices
  // from keys ("<seed>", "bootstrap", "<b>"), one next_below(n) per position;
  // percentile bounds interpolate linearly at rank q*(R-1).
  std::vector<double> stats;
  for (int b = 0; b < resamples; ++b) {
    CounterRng rng = CounterRng::keyed({std::to_string(seed), "bootstrap", std::to_string(b)});
    std::vector<Label> rp, rg;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = static_cast<std::size_t>(rng.next_below(n));
      rp.push_back(preds[idx]);
      rg.push_back(golds[idx]);
    }
    stats.push_back(accuracy(rp, rg));
  }
  std::sort(stats.begin(), stats.end());
  auto interp = [&](double q) {
    const double h = q * static_cast<double>(stats.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= stats.size()) return stats.back();
    return stats[lo] + (h - static_cast<double>(lo)) * (stats[lo + 1] - stats[lo]);
  };

  auto [lo, hi] = bootstrap_ci(accuracy, preds, golds, resamples, seed);
  CHECK(lo == interp(0.025));
  CHECK(hi == interp(0.975));
  CHECK(lo <= hi);

  SUBCASE("same seed reproduces, different seed moves") {
    auto again = bootstrap_ci(accuracy, preds, golds, resamples, seed);
    CHECK(again.first == lo);
    CHECK(again.second == hi);
    auto other = bootstrap_ci(accuracy, preds, golds, resamples, seed + 1);
    CHECK((other.first != lo || other.second != hi));
  }
  SUBCASE("too few resamples is an error") {
    CHECK_THROWS_AS(bootstrap_ci(accuracy, preds, golds, 99, seed), InvalidCount);
  }
}

TEST_CASE("metrics: report assembles all pieces consistently") {
  CounterRng rng = CounterRng::keyed({"report-fixture"});
  std::vector<Label> preds, golds;
  for (int i = 0; i < 60; ++i) {
    const int g = static_cast<int>(rng.next_below(3));
    golds.push_back(make_label(SchemeId::ThreeWay, g));
    const int p = rng.next_double() < 0.7 ? g : static_cast<int>(rng.next_below(3));
    preds.push_back(make_label(SchemeId::ThreeWay, p));
  }
  MetricsReport rep = compute_metrics_report(preds, golds, 42, 200);
  CHECK(rep.scheme == SchemeId::ThreeWay);
  CHECK(rep.n == 60);
  CHECK(rep.accuracy == accuracy(preds, golds));
  CHECK(rep.kappa == cohen_kappa(preds, golds));
  CHECK(rep.confusion == confusion_matrix(preds, golds));

  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].code == golds[i].code) ++hits;
  }
  CHECK(rep.accuracy_ci95 == wilson_interval(hits, preds.size(), 0.95));
  CHECK(rep.kappa_ci95.first <= rep.kappa);
  CHECK(rep.kappa_ci95.second >= rep.kappa);

  REQUIRE(rep.spearman.has_value());
  std::vector<int> pc, gc;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    pc.push_back(preds[i].code);
    gc.push_back(golds[i].code);
  }
  CHECK(*rep.spearman == spearman(pc, gc));
  CHECK(rep.spearman_ci95.has_value());
  CHECK(rep.spearman_caveat.empty());

  SUBCASE("the 5-way report carries the rank-metric caveat") {
    std::vector<Label> p5, g5;
    for (int i = 0; i < 30; ++i) {
      p5.push_back(make_label(SchemeId::FiveWay, i % 5));
      g5.push_back(make_label(SchemeId::FiveWay, (i + (i % 3 == 0 ? 1 : 0)) % 5));
    }
    MetricsReport r5 = compute_metrics_report(p5, g5, 1, 200);
    CHECK_FALSE(r5.spearman_caveat.empty());
  }
  SUBCASE("constant predictions leave spearman absent") {
    std::vector<Label> cp(20, make_label(SchemeId::ThreeWay, 1));
    std::vector<Label> cg;
    for (int i = 0; i < 20; ++i) cg.push_back(make_label(SchemeId::ThreeWay, i % 3));
    MetricsReport rc = compute_metrics_report(cp, cg, 1, 200);
    CHECK_FALSE(rc.spearman.has_value());
    CHECK_FALSE(rc.spearman_ci95.has_value());
  }
}

TEST_CASE("metrics: confusion grid prints labels on both axes") {
  std::vector<Label> preds = labels_of(SchemeId::TwoWay, {0, 0, 1, 1, 0});
  std::vector<Label> golds = labels_of(SchemeId::TwoWay, {0, 1, 1, 1, 0});
  MetricsReport rep = compute_metrics_report(preds, golds, 7, 200);
  const std::string grid = confusion_grid(rep);
  CHECK(grid.find("gold\\pred") != std::string::npos);
  CHECK(grid.find("correct") != std::string::npos);
  CHECK(grid.find("incorrect") != std::string::npos);
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 3);
}
