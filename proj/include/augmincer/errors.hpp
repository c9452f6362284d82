// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace augmincer {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclass onto its exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: schema violations, out-of-range values, malformed config.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File or stream failures, including the scoring cache.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Rank deficiency, non-convergence and similar estimation failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A statistic is undefined for the supplied data (zero variance, D_e = 0).
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace augmincer
