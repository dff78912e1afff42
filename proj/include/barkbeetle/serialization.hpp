// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "barkbeetle/victim_tree.hpp"

namespace barkbeetle {

inline constexpr std::string_view kTreeFormat = "barkbeetle-tree-v1";

/// Serializes to a barkbeetle-tree-v1 JSON document. Doubles are written
/// with round-trip precision.
std::string save(const VictimTree& tree);

/// Parses a barkbeetle-tree-v1 document. Shape errors raise ParseError
/// naming the field; invariant violations raise ValidationError (or
/// IdentifiabilityError for unsupported classification trees).
VictimTree load(std::string_view document);

VictimTree load_file(const std::filesystem::path& path);
void save_file(const VictimTree& tree, const std::filesystem::path& path);

}  // namespace barkbeetle
