// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#include "barkbeetle/types.hpp"

#include <cstdio>

#include "barkbeetle/errors.hpp"

namespace barkbeetle {

std::string to_string(Task task) {
  return task == Task::kRegression ? "regression" : "classification";
}

Task task_from_string(const std::string& name) {
  if (name == "regression") return Task::kRegression;
  if (name == "classification") return Task::kClassification;
  throw ValidationError("unknown task '" + name + "'");
}

void validate_feature_specs(std::span<const FeatureSpec> features) {
  if (features.empty()) throw ValidationError("at least one feature is required");
  for (std::size_t i = 0; i < features.size(); ++i) {
    const FeatureSpec& f = features[i];
    if (f.index != static_cast<int>(i)) {
      throw ValidationError("feature indices must be contiguous from 0; found " +
                            std::to_string(f.index) + " at position " + std::to_string(i));
    }
    if (!(f.min < f.max)) {
      throw ValidationError("feature " + std::to_string(i) + " has min >= max");
    }
  }
}

std::string LeafLabel::to_string() const {
  if (!is_regression()) return std::to_string(class_id());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value());
  return buf;
}

}  // namespace barkbeetle
