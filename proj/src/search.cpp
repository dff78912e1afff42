// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#include "barkbeetle/search.hpp"

#include <cmath>

#include "barkbeetle/errors.hpp"

namespace barkbeetle {

namespace {

// True when the probe at x[feature] = value shows the baseline label.
bool shows_baseline(Oracle& oracle, const SearchRequest& req, Input& x, double value) {
  x[req.feature] = value;
  if (!req.fault_position) {
    if (oracle.infer(x) != req.baseline) return false;
    return !req.baseline_beta || oracle.probe_path(x) == *req.baseline_beta;
  }
  // A traversal that ends before the fault position left the baseline
  // subtree above it; the side channel reveals this without a glitch.
  if (oracle.probe_path(x) <= *req.fault_position) return false;
  const FaultSpec fault{*req.fault_position, req.flag};
  if (!req.baseline_beta) return oracle.fault_infer(x, fault) == req.baseline;
  return oracle.fault_observe(x, fault) == Observation{req.baseline, *req.baseline_beta};
}

}  // namespace

double snap_to_grid(double low, double high, std::int64_t denominator, double fallback) {
  if (denominator <= 0) return fallback;
  const double n = static_cast<double>(denominator);
  if (high - low >= 1.0 / n) return fallback;
  const auto k0 = static_cast<std::int64_t>(std::ceil(low * n));
  std::optional<double> found;
  for (std::int64_t k = k0 - 1; k <= k0 + 1; ++k) {
    const double candidate = static_cast<double>(k) / n;
    if (candidate > low && candidate <= high) {
      if (found && *found != candidate) return fallback;
      found = candidate;
    }
  }
  return found.value_or(fallback);
}

double bisect_threshold(Oracle& oracle, const SearchRequest& req) {
  if (!(req.low < req.high)) throw NoThresholdInRangeError("empty search bracket");
  Input x = req.x;
  double low = req.low;
  double high = req.high;
  double last = high;
  while (high - low >= req.epsilon) {
    const double mid = low + (high - low) / 2.0;
    const bool base = shows_baseline(oracle, req, x, mid);
    if ((req.flag == kLeft) == base) {
      low = mid;
    } else {
      high = mid;
    }
    last = mid;
  }
  return snap_to_grid(low, high, req.snap_denominator, last);
}

double fault_assisted_search(Oracle& oracle, const SearchRequest& req) {
  if (!(req.low < req.high)) throw NoThresholdInRangeError("empty search bracket");
  Input x = req.x;
  const double far_end = req.flag == kLeft ? req.high : req.low;
  if (shows_baseline(oracle, req, x, far_end)) {
    throw NoThresholdInRangeError("feature " + std::to_string(req.feature) +
                                  " shows the baseline label across [" + std::to_string(req.low) +
                                  ", " + std::to_string(req.high) + "]");
  }
  return bisect_threshold(oracle, req);
}

}  // namespace barkbeetle
