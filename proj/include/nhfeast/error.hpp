// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nhfeast {

enum class ErrorKind {
  DimensionMismatch,
  InvalidArgument,
  Parse,
  UnsupportedFormat,
  Io,
  InvalidContour,
  SingularFilter,
  SingularShift,
  NonConvergedEig,
  DefectiveSuspected,
  SingularBU,
  EmptySubspace,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` is machine-readable and
/// maps onto the error JSON emitted by the command-line driver.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace nhfeast
