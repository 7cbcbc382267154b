#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rubricjudge/core.hpp"
#include "rubricjudge/judge_types.hpp"

namespace rubricjudge {

struct MixedItems : std::runtime_error {
  MixedItems() : std::runtime_error("responses mix item ids or conditions") {}
};
struct NoGoldLabels : std::runtime_error {
  NoGoldLabels() : std::runtime_error("no gold labels supplied") {}
};

struct VoteHistogram {
  std::string item_id;
  std::map<Label, int> counts;  // parsed runs only
  int n_requested = 0;          // all runs, including parse/transport failures
  int n_valid = 0;              // sum of counts
};

struct ConsensusDecision {
  std::string item_id;
  std::optional<Label> graded;  // nullopt = deferred
  double top_fraction = 0.0;    // max vote count / n_requested
  double threshold = 0.0;

  bool deferred() const { return !graded.has_value(); }
};

struct TrustCurvePoint {
  SchemeId scheme;
  double threshold;
  double coverage;                           // n_graded / n_total
  std::optional<double> effective_accuracy;  // undefined when nothing graded
  int n_graded = 0;
  int n_total = 0;
};

// Counts parsed labels over one item's runs. All responses must share the
// item id and condition.
VoteHistogram tally(std::span<const JudgeResponse> responses);

// Grades iff the top label is a unique argmax and reaches fraction
// `threshold` of the *requested* runs, so unparsed runs dilute confidence
// toward deferral. Ties defer. Threshold comparison is inclusive (>=).
ConsensusDecision decide(const VoteHistogram& hist, double threshold);

// Default grid 0.55, 0.60, ..., 0.95 (expressed exactly as i/100).
std::vector<double> default_threshold_grid();

// Sweeps thresholds over a full run matrix. `golds` maps item id to the gold
// label of the responses' scheme. Points come out in threshold order.
std::vector<TrustCurvePoint> trust_curve(std::span<const JudgeResponse> responses,
                                         const std::map<std::string, Label>& golds,
                                         std::span<const double> thresholds);

}  // namespace rubricjudge
