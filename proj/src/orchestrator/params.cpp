// SPDX-License-Identifier: Apache-2.0
#include "inform/orchestrator/params.hpp"

#include <cmath>

#include "inform/diffcore/rng.hpp"
#include "inform/diffcore/tensor.hpp"
#include "inform/error.hpp"

namespace inform {

OrchestratorParams::OrchestratorParams(ParamLayout layout, std::vector<double> values)
    : layout_(layout), values_(std::move(values)) {
  if (values_.size() != layout_.total()) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vector does not match its layout");
  }
  require_finite(values_, "orchestrator parameters");
}

OrchestratorParams OrchestratorParams::initialize(ParamLayout layout, double lambda_init, double init_scale,
                                                  std::uint64_t seed) {
  if (layout.experts < 2 || layout.dim == 0 || layout.routing_dim == 0) {
    throw Error(ErrorCode::InvalidArgument, "invalid parameter layout");
  }
  Rng rng = derive_stream(seed, {fnv1a("orchestrator-init")});
  std::vector<double> v(layout.total(), 0.0);
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(layout.dim));
  const double r_scale = 1.0 / std::sqrt(static_cast<double>(layout.routing_dim));

  for (std::size_t a = 0; a < layout.routing_dim; ++a) {
    for (std::size_t b = 0; b < layout.dim; ++b) {
      double x = init_scale * in_scale * standard_normal(rng);
      if (a == b) x += 1.0;
      v[layout.adapter() + a * layout.dim + b] = x;
    }
  }
  for (std::size_t i = 0; i < layout.routing_dim * layout.routing_dim; ++i) {
    v[layout.query() + i] = init_scale * r_scale * standard_normal(rng);
  }
  for (std::size_t i = 0; i < layout.routing_dim * layout.routing_dim; ++i) {
    v[layout.key() + i] = init_scale * r_scale * standard_normal(rng);
  }
  v[layout.lambda()] = lambda_init;
  for (std::size_t i = 0; i < layout.experts * layout.dim; ++i) {
    v[layout.input_heads() + i] = init_scale * in_scale * standard_normal(rng);
  }
  return OrchestratorParams(layout, std::move(v));
}

}  // namespace inform
