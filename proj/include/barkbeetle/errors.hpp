// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BarkBeetle Toolkit Authors

#pragma once

#include <stdexcept>
#include <string>

namespace barkbeetle {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input vector length does not match the number of features.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed tree document. `field()` names the offending key.
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Structurally well-formed input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Two leaves cannot be told apart by (label, path node count).
class IdentifiabilityError : public Error {
 public:
  using Error::Error;
};

class FaultOutOfRangeError : public Error {
 public:
  using Error::Error;
};

class GlitchExhaustedError : public Error {
 public:
  using Error::Error;
};

/// Binary search bracket has the same label at both ends.
class NoThresholdInRangeError : public Error {
 public:
  using Error::Error;
};

class ExtractionStalledError : public Error {
 public:
  using Error::Error;
};

class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

/// Recovered paths disagree on a shared prefix.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace barkbeetle
