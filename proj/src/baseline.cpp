// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#include "barkbeetle/baseline.hpp"

#include <deque>
#include <map>
#include <random>

#include "barkbeetle/errors.hpp"
#include "barkbeetle/search.hpp"

namespace barkbeetle {

bool LeafConstraintBox::contains(std::span<const double> x) const {
  if (x.size() != intervals.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!intervals[i].contains(x[i])) return false;
  }
  return true;
}

int LeafConstraintBox::constraint_count() const {
  int n = 0;
  for (const Interval& iv : intervals) n += (iv.low ? 1 : 0) + (iv.high ? 1 : 0);
  return n;
}

std::optional<LeafLabel> predict(const std::vector<LeafConstraintBox>& boxes,
                                 std::span<const double> x) {
  for (const LeafConstraintBox& b : boxes) {
    if (b.contains(x)) return b.label;
  }
  return std::nullopt;
}

namespace {

using Key = std::pair<LeafLabel, int>;

Key observe(Oracle& oracle, const Input& x) { return {oracle.infer(x), oracle.probe_path(x)}; }

// Registered boxes are only accurate to the search granularity, so a
// revisit may land just outside one.
bool near_box(const LeafConstraintBox& box, const Input& x, double slack) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Interval& iv = box.intervals[i];
    if (iv.low && x[i] < *iv.low - slack) return false;
    if (iv.high && x[i] >= *iv.high + slack) return false;
  }
  return true;
}

}  // namespace

BaselineResult baseline_extract(Oracle& target, const ExtractionConfig& config, std::uint64_t seed) {
  config.validate();
  BudgetedOracle oracle(target, config.max_queries);
  const int d = config.dimension();

  std::mt19937_64 rng(seed);
  Input start(d);
  for (const FeatureSpec& f : config.features) {
    start[f.index] = std::uniform_real_distribution<double>(f.min, f.max)(rng);
  }

  BaselineResult result;
  std::map<Key, std::size_t> seen;
  std::deque<Input> frontier{start};
  while (!frontier.empty()) {
    const Input x = std::move(frontier.front());
    frontier.pop_front();
    const Key key = observe(oracle, x);
    if (auto it = seen.find(key); it != seen.end()) {
      if (!near_box(result.boxes[it->second], x, 2.0 * config.epsilon)) {
        throw IdentifiabilityError("label " + key.first.to_string() + " with path length " +
                                   std::to_string(key.second) + " seen in two disjoint regions");
      }
      continue;
    }

    LeafConstraintBox box;
    box.label = key.first;
    box.beta = key.second;
    box.intervals.resize(d);
    for (int i = 0; i < d; ++i) {
      const FeatureSpec& spec = config.features[i];
      Input probe = x;
      SearchRequest req;
      req.x = x;
      req.baseline = key.first;
      if (!key.first.is_regression()) req.baseline_beta = key.second;
      req.feature = i;
      req.epsilon = config.epsilon;
      req.snap_denominator = config.snap_denominator;

      probe[i] = spec.min - 1.0;
      if (observe(oracle, probe) != key && spec.min < x[i]) {
        req.low = spec.min;
        req.high = x[i];
        req.flag = kRight;
        box.intervals[i].low = bisect_threshold(oracle, req);
      }
      probe[i] = spec.max + 1.0;
      if (observe(oracle, probe) != key && x[i] < spec.max) {
        req.low = x[i];
        req.high = spec.max;
        req.flag = kLeft;
        box.intervals[i].high = bisect_threshold(oracle, req);
      }
      if (box.intervals[i].low) {
        Input out = x;
        out[i] = *box.intervals[i].low - config.nudge(i);
        frontier.push_back(std::move(out));
      }
      if (box.intervals[i].high) {
        Input out = x;
        out[i] = *box.intervals[i].high + config.nudge(i);
        frontier.push_back(std::move(out));
      }
    }
    seen.emplace(key, result.boxes.size());
    result.boxes.push_back(std::move(box));
  }
  result.ledger = target.ledger();
  return result;
}

}  // namespace barkbeetle
