// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace inform {

enum class ErrorCode {
  AllMasked,
  NonFinite,
  ZeroVector,
  NonPositiveTemperature,
  EmptyText,
  SchemaError,
  DimensionMismatch,
  TooFewExperts,
  ConstantInput,
  AllZero,
  ZeroVariance,
  TooFewSamples,
  ZeroMass,
  ConfigError,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure in the engine surfaces as an Error carrying a code, so
/// callers (and the CLI exit-code mapping) can branch on the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace inform
