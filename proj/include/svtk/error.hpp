// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace svtk {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input files (bad magic, truncated payloads,
/// invariant-violating records).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Well-formed files whose numeric content is unusable (NaN, Inf).
class DataError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Numeric or domain failures: no voiced frames, dead channels, parameters
/// outside their valid range, shape mismatches between operands.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace svtk
