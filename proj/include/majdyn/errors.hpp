// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace majdyn {

/// Parameter outside the domain of a model or formula (p out of range, N < 2, ...).
class InvalidParameters : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Structurally inconsistent input (size mismatch, empty sample, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A formula evaluated at a singular point (e.g. p in {0,1} where p(1-p) divides).
class SingularParameters : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Conditioning on an event of probability zero.
class DegenerateCondition : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Rejection sampler ran past its attempt budget.
class SamplerExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive oracle asked to work above its configured size cap.
class SizeLimitExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Reading a config or writing a report failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace majdyn
