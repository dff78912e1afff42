// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#include "barkbeetle/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "barkbeetle/errors.hpp"

namespace barkbeetle {

namespace {

void require_same_features(const VictimTree& a, const VictimTree& b) {
  if (a.features() != b.features()) throw ValidationError("feature specs differ");
}

}  // namespace

EquivalenceReport functionally_equivalent(const VictimTree& a, const VictimTree& b,
                                          std::size_t samples, std::uint64_t seed) {
  require_same_features(a, b);
  EquivalenceReport report;
  report.samples = samples;
  std::mt19937_64 rng(seed);
  const auto& features = a.features();
  std::vector<std::uniform_real_distribution<double>> dists;
  for (const FeatureSpec& f : features) dists.emplace_back(f.min, f.max);
  Input x(features.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = dists[i](rng);
    if (!(infer(a, x) == infer(b, x))) ++report.mismatches;
  }
  report.max_threshold_gap = aligned_threshold_gap(a, b);
  return report;
}

std::optional<double> aligned_threshold_gap(const VictimTree& a, const VictimTree& b) {
  if (a.features() != b.features()) return std::nullopt;
  double gap = 0.0;
  auto walk = [&](auto&& self, int ida, int idb) -> bool {
    const bool la = a.is_leaf(ida), lb = b.is_leaf(idb);
    if (la != lb) return false;
    if (la) return true;
    const VictimNode& na = a.node(ida);
    const VictimNode& nb = b.node(idb);
    if (na.feature != nb.feature) return false;
    gap = std::max(gap, std::abs(na.threshold - nb.threshold));
    return self(self, na.left, nb.left) && self(self, na.right, nb.right);
  };
  if (!walk(walk, a.root(), b.root())) return std::nullopt;
  return gap;
}

std::uint64_t grid_mismatches(const VictimTree& a, const VictimTree& b, double step) {
  require_same_features(a, b);
  if (!(step > 0.0)) throw ValidationError("grid step must be positive");
  const auto& features = a.features();
  const int d = static_cast<int>(features.size());

  // Per feature: grid index ranges [begin, end) over which every threshold
  // comparison of both trees is constant.
  struct Cell {
    std::int64_t first;
    std::int64_t count;
  };
  std::vector<std::vector<Cell>> cells(d);
  for (int f = 0; f < d; ++f) {
    const double lo = features[f].min;
    const auto n_points = static_cast<std::int64_t>(std::floor((features[f].max - lo) / step)) + 1;
    auto point = [&](std::int64_t k) { return lo + static_cast<double>(k) * step; };
    // First grid index whose point is >= t.
    auto first_at_or_above = [&](double t) {
      std::int64_t l = 0, h = n_points;
      while (l < h) {
        std::int64_t m = l + (h - l) / 2;
        if (point(m) < t) l = m + 1; else h = m;
      }
      return l;
    };
    std::vector<std::int64_t> cuts{0, n_points};
    for (const VictimTree* tree : {&a, &b}) {
      for (const VictimNode& n : tree->nodes()) {
        if (n.feature == f) cuts.push_back(first_at_or_above(n.threshold));
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      cells[f].push_back({cuts[i], cuts[i + 1] - cuts[i]});
    }
  }

  std::uint64_t mismatches = 0;
  std::vector<std::size_t> odometer(d, 0);
  Input x(d);
  while (true) {
    std::uint64_t weight = 1;
    for (int f = 0; f < d; ++f) {
      const Cell& c = cells[f][odometer[f]];
      x[f] = features[f].min + static_cast<double>(c.first) * step;
      weight *= static_cast<std::uint64_t>(c.count);
    }
    if (!(infer(a, x) == infer(b, x))) mismatches += weight;
    int f = 0;
    while (f < d && ++odometer[f] == cells[f].size()) odometer[f++] = 0;
    if (f == d) break;
  }
  return mismatches;
}

}  // namespace barkbeetle
