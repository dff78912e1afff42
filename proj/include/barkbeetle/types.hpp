// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace barkbeetle {

enum class Task { kRegression, kClassification };

std::string to_string(Task task);
Task task_from_string(const std::string& name);

/// Branch taken at an internal node: 0 = left (x_i < t), 1 = right.
enum Branch : int { kLeft = 0, kRight = 1 };

struct FeatureSpec {
  int index = 0;
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

/// Throws ValidationError unless indices are 0..d-1 in order and min < max.
void validate_feature_specs(std::span<const FeatureSpec> features);

/// Leaf output. Regression values compare bit-exactly; they are never
/// compared with a tolerance.
class LeafLabel {
 public:
  LeafLabel() = default;

  static LeafLabel regression(double value) { return LeafLabel(value); }
  static LeafLabel classification(std::int64_t class_id) { return LeafLabel(class_id); }

  bool is_regression() const { return std::holds_alternative<double>(value_); }
  double value() const { return std::get<double>(value_); }
  std::int64_t class_id() const { return std::get<std::int64_t>(value_); }

  std::string to_string() const;

  friend bool operator==(const LeafLabel&, const LeafLabel&) = default;
  friend bool operator<(const LeafLabel& a, const LeafLabel& b) { return a.value_ < b.value_; }

 private:
  explicit LeafLabel(double v) : value_(v) {}
  explicit LeafLabel(std::int64_t v) : value_(v) {}

  std::variant<double, std::int64_t> value_{0.0};
};

using Input = std::vector<double>;

}  // namespace barkbeetle
