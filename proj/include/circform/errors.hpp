// Copyright 2026 circform authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace circform {

/// Rejected input: invalid graph, violated gain condition, malformed config.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Geometry failure hit while evaluating or simulating.
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

/// The guidance field vanished at the query point.
class ZeroFieldError : public DegeneracyError {
 public:
  explicit ZeroFieldError(const std::string& what) : DegeneracyError(what) {}
};

}  // namespace circform
