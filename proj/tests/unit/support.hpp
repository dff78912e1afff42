// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <vector>

#include "barkbeetle/victim_tree.hpp"

namespace bbtest {

using namespace barkbeetle;

inline std::vector<FeatureSpec> box(int d, double lo = 0.0, double hi = 10.0) {
  std::vector<FeatureSpec> f;
  for (int i = 0; i < d; ++i) f.push_back({i, lo, hi});
  return f;
}

// Regression leaf labels 100 + id.
inline std::vector<VictimLeaf> leaves(std::initializer_list<int> ids) {
  std::vector<VictimLeaf> out;
  for (int id : ids) out.push_back({id, LeafLabel::regression(100.0 + id)});
  return out;
}

/// root x0 < 5 with two leaves.
inline VictimTree single_split(double t = 5.0) {
  return VictimTree(Task::kRegression, box(1), {{0, 0, t, 1, 2}}, leaves({1, 2}), 0);
}

/// Path x0<9 -> x0<6 -> x0<3 down the left spine, with leaves hanging off
/// every right branch.
inline VictimTree nested_spine() {
  return VictimTree(Task::kRegression, box(2),
                    {{0, 0, 9.0, 1, 10}, {1, 0, 6.0, 2, 11}, {2, 0, 3.0, 12, 13}},
                    leaves({10, 11, 12, 13}), 0);
}

/// Depth-3 complete toy tree over three features with a duplicated feature
/// on several paths.
inline VictimTree toy_tree() {
  return VictimTree(Task::kRegression, box(3),
                    {{0, 0, 5.0, 1, 2},
                     {1, 1, 4.0, 3, 4},
                     {2, 2, 6.0, 5, 6},
                     {3, 0, 2.0, 7, 8},
                     {4, 2, 3.0, 9, 10},
                     {5, 0, 7.5, 11, 12},
                     {6, 1, 8.0, 13, 14}},
                    leaves({7, 8, 9, 10, 11, 12, 13, 14}), 0);
}

/// Path x<a, x<b, x>=c with a > b > c on one feature (a = 8, b = 6, c = 2).
inline VictimTree blind_spot_tree() {
  return VictimTree(Task::kRegression, box(1),
                    {{0, 0, 8.0, 1, 10}, {1, 0, 6.0, 2, 11}, {2, 0, 2.0, 12, 13}},
                    leaves({10, 11, 12, 13}), 0);
}

}  // namespace bbtest
