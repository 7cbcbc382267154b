#include "rubricjudge/consensus.hpp"

#include <algorithm>

namespace rubricjudge {

VoteHistogram tally(std::span<const JudgeResponse> responses) {
  VoteHistogram hist;
  for (const JudgeResponse& response : responses) {
    if (hist.n_requested == 0) {
      hist.item_id = response.item_id;
    } else if (response.item_id != hist.item_id ||
               response.condition != responses.front().condition) {
      throw MixedItems();
    }
    ++hist.n_requested;
    if (response.parsed) {
      ++hist.counts[response.parsed->label];
      ++hist.n_valid;
    }
  }
  return hist;
}

ConsensusDecision decide(const VoteHistogram& hist, double threshold) {
  ConsensusDecision decision;
  decision.item_id = hist.item_id;
  decision.threshold = threshold;

  int top = 0;
  int ties = 0;
  const Label* winner = nullptr;
  for (const auto& [label, count] : hist.counts) {
    if (count > top) {
      top = count;
      ties = 1;
      winner = &label;
    } else if (count == top) {
      ++ties;
    }
  }
  decision.top_fraction =
      hist.n_requested > 0 ? static_cast<double>(top) / hist.n_requested : 0.0;
  if (winner != nullptr && ties == 1 && decision.top_fraction >= threshold) {
    decision.graded = *winner;
  }
  return decision;
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int pct = 55; pct <= 95; pct += 5) grid.push_back(pct / 100.0);
  return grid;
}

std::vector<TrustCurvePoint> trust_curve(std::span<const JudgeResponse> responses,
                                         const std::map<std::string, Label>& golds,
                                         std::span<const double> thresholds) {
  if (golds.empty()) throw NoGoldLabels();

  // Group responses per item, preserving the histogram semantics of tally().
  std::map<std::string, VoteHistogram> hists;
  for (const JudgeResponse& response : responses) {
    VoteHistogram& hist = hists[response.item_id];
    hist.item_id = response.item_id;
    ++hist.n_requested;
    if (response.parsed) {
      ++hist.counts[response.parsed->label];
      ++hist.n_valid;
    }
  }

  const SchemeId scheme = golds.begin()->second.scheme;
  std::vector<TrustCurvePoint> points;
  for (double threshold : thresholds) {
    TrustCurvePoint point;
    point.scheme = scheme;
    point.threshold = threshold;
    int correct = 0;
    for (const auto& [item_id, hist] : hists) {
      auto gold_it = golds.find(item_id);
      if (gold_it == golds.end()) throw NoGoldLabels();
      ++point.n_total;
      const ConsensusDecision decision = decide(hist, threshold);
      if (decision.deferred()) continue;
      ++point.n_graded;
      if (*decision.graded == gold_it->second) ++correct;
    }
    point.coverage =
        point.n_total > 0 ? static_cast<double>(point.n_graded) / point.n_total : 0.0;
    if (point.n_graded > 0) {
      point.effective_accuracy = static_cast<double>(correct) / point.n_graded;
    }
    points.push_back(point);
  }
  return points;
}

}  // namespace rubricjudge
