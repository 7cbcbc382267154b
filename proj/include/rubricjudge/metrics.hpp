#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rubricjudge/core.hpp"

namespace rubricjudge {

struct LengthMismatch : std::runtime_error {
  LengthMismatch(std::size_t a, std::size_t b)
      : std::runtime_error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};
struct SchemeMismatch : std::runtime_error {
  SchemeMismatch() : std::runtime_error("labels from different schemes") {}
  explicit SchemeMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct ConstantInput : std::runtime_error {
  ConstantInput() : std::runtime_error("rank correlation undefined for constant input") {}
};
struct InvalidCount : std::runtime_error {
  InvalidCount() : std::runtime_error("successes must satisfy 0 <= successes <= n, n >= 1") {}
};

using Interval = std::pair<double, double>;

// Rows are gold labels, columns predictions, both ordered by label code.
std::vector<std::vector<int>> confusion_matrix(std::span<const Label> preds,
                                               std::span<const Label> golds);

double accuracy(std::span<const Label> preds, std::span<const Label> golds);

// (p_o - p_e) / (1 - p_e); when p_e == 1 the formula is 0/0 and the value is
// 1 for perfect agreement, else 0.
double cohen_kappa(std::span<const Label> preds, std::span<const Label> golds);

// Pearson correlation of average-tie ranks. Throws ConstantInput when either
// side has no variation (undefined, deliberately not reported as zero).
double spearman(std::span<const int> pred_codes, std::span<const int> gold_codes);

// Wilson score interval; boundary cases (0 or n successes) clamp exactly to
// 0 and 1.
Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double confidence);

// Percentile bootstrap (2.5/97.5 for confidence 0.95). Resample b draws its
// indices from the documented counter RNG keyed ("<seed>", "bootstrap",
// "<b>"), one next_below(n) per position; bounds use linear interpolation at
// rank q*(R-1) over the sorted statistics.
Interval bootstrap_ci(
    const std::function<double(std::span<const Label>, std::span<const Label>)>& metric,
    std::span<const Label> preds, std::span<const Label> golds, int resamples,
    std::uint64_t seed, double confidence = 0.95);

struct MetricsReport {
  SchemeId scheme = SchemeId::FiveWay;
  int n = 0;
  double accuracy = 0.0;
  Interval accuracy_ci95{0.0, 0.0};  // Wilson
  double kappa = 0.0;
  Interval kappa_ci95{0.0, 0.0};  // bootstrap percentile
  std::optional<double> spearman;
  std::optional<Interval> spearman_ci95;  // bootstrap percentile
  std::string spearman_caveat;            // set for the 5-way scheme
  std::vector<std::vector<int>> confusion;
};

MetricsReport compute_metrics_report(std::span<const Label> preds, std::span<const Label> golds,
                                     std::uint64_t seed, int bootstrap_resamples = 1000);

// Plain-text confusion grid with label names on both axes.
std::string confusion_grid(const MetricsReport& report);

}  // namespace rubricjudge
