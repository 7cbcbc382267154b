#include "rubricjudge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "rubricjudge/rng.hpp"

namespace rubricjudge {
namespace {

void check_pair(std::span<const Label> preds, std::span<const Label> golds) {
  if (preds.size() != golds.size()) throw LengthMismatch(preds.size(), golds.size());
  if (preds.empty()) throw LengthMismatch(0, 0);
  const SchemeId scheme = golds.front().scheme;
  for (const Label& label : preds) {
    if (label.scheme != scheme) throw SchemeMismatch();
  }
  for (const Label& label : golds) {
    if (label.scheme != scheme) throw SchemeMismatch();
  }
}

// Average ranks (1-based), ties share the mean rank of their block.
std::vector<double> average_ranks(std::span<const int> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ConstantInput();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

std::vector<std::vector<int>> confusion_matrix(std::span<const Label> preds,
                                               std::span<const Label> golds) {
  check_pair(preds, golds);
  const int k = cardinality(golds.front().scheme);
  std::vector<std::vector<int>> matrix(static_cast<std::size_t>(k),
                                       std::vector<int>(static_cast<std::size_t>(k), 0));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    matrix[static_cast<std::size_t>(golds[i].code)][static_cast<std::size_t>(preds[i].code)]++;
  }
  return matrix;
}

double accuracy(std::span<const Label> preds, std::span<const Label> golds) {
  check_pair(preds, golds);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].code == golds[i].code) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double cohen_kappa(std::span<const Label> preds, std::span<const Label> golds) {
  const auto matrix = confusion_matrix(preds, golds);
  const std::size_t k = matrix.size();
  const double n = static_cast<double>(preds.size());

  double diagonal = 0.0;
  std::vector<double> row_sums(k, 0.0), col_sums(k, 0.0);
  for (std::size_t g = 0; g < k; ++g) {
    for (std::size_t p = 0; p < k; ++p) {
      row_sums[g] += matrix[g][p];
      col_sums[p] += matrix[g][p];
    }
    diagonal += matrix[g][g];
  }
  const double p_o = diagonal / n;
  double p_e = 0.0;
  for (std::size_t c = 0; c < k; ++c) p_e += (row_sums[c] / n) * (col_sums[c] / n);

  if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

double spearman(std::span<const int> pred_codes, std::span<const int> gold_codes) {
  if (pred_codes.size() != gold_codes.size())
    throw LengthMismatch(pred_codes.size(), gold_codes.size());
  if (pred_codes.size() < 2) throw LengthMismatch(pred_codes.size(), 2);
  const auto pred_ranks = average_ranks(pred_codes);
  const auto gold_ranks = average_ranks(gold_codes);
  return pearson(pred_ranks, gold_ranks);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double confidence) {
  if (n < 1 || successes > n) throw InvalidCount();
  if (confidence <= 0.0 || confidence >= 1.0) throw InvalidCount();

  const boost::math::normal_distribution<double> normal;
  const double z = boost::math::quantile(normal, 0.5 + confidence / 2.0);
  const double nn = static_cast<double>(n);
  const double p_hat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p_hat + z2 / (2.0 * nn)) / denom;
  const double half =
      (z / denom) * std::sqrt(p_hat * (1.0 - p_hat) / nn + z2 / (4.0 * nn * nn));

  double lo = center - half;
  double hi = center + half;
  if (successes == 0) lo = 0.0;
  if (successes == n) hi = 1.0;
  return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

Interval bootstrap_ci(
    const std::function<double(std::span<const Label>, std::span<const Label>)>& metric,
    std::span<const Label> preds, std::span<const Label> golds, int resamples,
    std::uint64_t seed, double confidence) {
  check_pair(preds, golds);
  if (resamples < 100) throw InvalidCount();

  const std::size_t n = preds.size();
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(resamples));
  std::vector<Label> rp(n, preds[0]), rg(n, golds[0]);
  for (int b = 0; b < resamples; ++b) {
    CounterRng rng = CounterRng::keyed({std::to_string(seed), "bootstrap", std::to_string(b)});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = static_cast<std::size_t>(rng.next_below(n));
      rp[i] = preds[idx];
      rg[i] = golds[idx];
    }
    stats.push_back(metric(rp, rg));
  }
  std::sort(stats.begin(), stats.end());

  auto percentile = [&](double q) {
    const double h = q * static_cast<double>(stats.size() - 1);
    const std::size_t lo_idx = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo_idx);
    if (lo_idx + 1 >= stats.size()) return stats.back();
    return stats[lo_idx] + frac * (stats[lo_idx + 1] - stats[lo_idx]);
  };
  const double tail = (1.0 - confidence) / 2.0;
  return {percentile(tail), percentile(1.0 - tail)};
}

MetricsReport compute_metrics_report(std::span<const Label> preds, std::span<const Label> golds,
                                     std::uint64_t seed, int bootstrap_resamples) {
  check_pair(preds, golds);
  MetricsReport report;
  report.scheme = golds.front().scheme;
  report.n = static_cast<int>(preds.size());
  report.confusion = confusion_matrix(preds, golds);
  report.accuracy = accuracy(preds, golds);

  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].code == golds[i].code) ++hits;
  }
  report.accuracy_ci95 = wilson_interval(hits, preds.size(), 0.95);

  report.kappa = cohen_kappa(preds, golds);
  report.kappa_ci95 = bootstrap_ci(cohen_kappa, preds, golds, bootstrap_resamples, seed);

  std::vector<int> pred_codes(preds.size()), gold_codes(golds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    pred_codes[i] = preds[i].code;
    gold_codes[i] = golds[i].code;
  }
  try {
    report.spearman = spearman(pred_codes, gold_codes);
    report.spearman_ci95 = bootstrap_ci(
        [](std::span<const Label> p, std::span<const Label> g) {
          std::vector<int> pc(p.size()), gc(g.size());
          for (std::size_t i = 0; i < p.size(); ++i) {
            pc[i] = p[i].code;
            gc[i] = g[i].code;
          }
          try {
            return spearman(pc, gc);
          } catch (const ConstantInput&) {
            return 0.0;  // degenerate resample; keeps the bootstrap total
          }
        },
        preds, golds, bootstrap_resamples, seed + 1);
  } catch (const ConstantInput&) {
    report.spearman = std::nullopt;  // undefined, reported as absent
  }
  if (report.scheme == SchemeId::FiveWay) {
    report.spearman_caveat =
        "rank correlation is not a valid metric for the 5-way scheme (labels are discrete "
        "semantic categories, not an ordinal scale)";
  }
  return report;
}

std::string confusion_grid(const MetricsReport& report) {
  const auto labels = all_labels(report.scheme);
  std::size_t width = 10;
  for (const Label& label : labels) width = std::max(width, label.name().size() + 2);

  std::ostringstream out;
  auto cell = [&](std::string_view text) {
    out << text;
    for (std::size_t i = text.size(); i < width; ++i) out << ' ';
  };
  cell("gold\\pred");
  for (const Label& label : labels) cell(label.name());
  out << '\n';
  for (std::size_t g = 0; g < labels.size(); ++g) {
    cell(labels[g].name());
    for (std::size_t p = 0; p < labels.size(); ++p) {
      cell(std::to_string(report.confusion[g][p]));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace rubricjudge
