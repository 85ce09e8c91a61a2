// SPDX-License-Identifier: Apache-2.0
#include "inform/error.hpp"

namespace inform {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::AllMasked: return "AllMasked";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewExperts: return "TooFewExperts";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace inform
