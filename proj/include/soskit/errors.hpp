// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace soskit {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input text (headers, records, non-numeric fields).
class ParseError : public Error {
 public:
  using Error::Error;
};

// An index escaped its declared range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// A dense Fock-space build was requested above the configured orbital limit.
class OracleLimitError : public Error {
 public:
  using Error::Error;
};

// A vector that must be unit norm (or nonzero) is not.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

// The optimizer hit a non-finite loss; carries the step at which it happened.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, long step) : Error(msg), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

// A scalar argument violated a mathematical domain constraint.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A discrete distribution with zero total mass cannot be sampled.
class DegenerateDistributionError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or unusable user-facing options.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace soskit
