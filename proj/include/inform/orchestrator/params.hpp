// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace inform {

/// Offsets of each parameter block inside the flat parameter vector.
///
///   adapter      routing_dim x dim      routing adapter A
///   query        routing_dim x routing_dim
///   key          routing_dim x routing_dim
///   lambda       1                      semantic-prior scale
///   input_heads  experts x dim          per-expert projection of the input
///   quality      experts                per-expert quality scalar
struct ParamLayout {
  std::size_t experts = 0;
  std::size_t dim = 0;
  std::size_t routing_dim = 0;

  std::size_t adapter() const noexcept { return 0; }
  std::size_t query() const noexcept { return routing_dim * dim; }
  std::size_t key() const noexcept { return query() + routing_dim * routing_dim; }
  std::size_t lambda() const noexcept { return key() + routing_dim * routing_dim; }
  std::size_t input_heads() const noexcept { return lambda() + 1; }
  std::size_t quality() const noexcept { return input_heads() + experts * dim; }
  std::size_t total() const noexcept { return quality() + experts; }

  friend bool operator==(const ParamLayout&, const ParamLayout&) = default;
};

/// The orchestrator's trainable state. The flat vector is the only mutable
/// training state; blocks are addressed through the layout.
class OrchestratorParams {
 public:
  OrchestratorParams(ParamLayout layout, std::vector<double> values);

  /// Adapter near identity, small Gaussian query/key/head weights, zero
  /// quality scalars, lambda = lambda_init.
  static OrchestratorParams initialize(ParamLayout layout, double lambda_init, double init_scale, std::uint64_t seed);

  const ParamLayout& layout() const noexcept { return layout_; }
  std::size_t count() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double lambda() const { return values_[layout_.lambda()]; }
  std::span<const double> quality() const { return std::span(values_).subspan(layout_.quality(), layout_.experts); }

 private:
  ParamLayout layout_;
  std::vector<double> values_;
};

}  // namespace inform
