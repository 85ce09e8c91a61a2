// SPDX-License-Identifier: Apache-2.0
#include "inform/diffcore/tape.hpp"

#include "inform/error.hpp"

namespace inform::ad {

Var Tape::variable(double value) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({static_cast<std::int32_t>(parents_.size()), 0});
  return Var(value, index, this);
}

Var Tape::record(double value, std::span<const Var> parents, std::span<const double> partials) {
  const auto first = static_cast<std::int32_t>(parents_.size());
  std::int32_t count = 0;
  for (std::size_t k = 0; k < parents.size(); ++k) {
    if (parents[k].is_constant()) continue;
    if (parents[k].tape != this) {
      throw Error(ErrorCode::InvalidArgument, "variable recorded on a different tape");
    }
    parents_.push_back(parents[k].index);
    partials_.push_back(partials[k]);
    ++count;
  }
  if (count == 0) return Var(value);
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({first, count});
  return Var(value, index, this);
}

Var Tape::unary(double value, const Var& a, double da) {
  if (a.is_constant()) return Var(value);
  const Var parents[1] = {a};
  const double partials[1] = {da};
  return record(value, parents, partials);
}

Var Tape::binary(double value, const Var& a, double da, const Var& b, double db) {
  const Var parents[2] = {a, b};
  const double partials[2] = {da, db};
  return record(value, parents, partials);
}

std::vector<double> Tape::adjoints(const Var& output) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  if (output.is_constant()) return adj;
  adj[static_cast<std::size_t>(output.index)] = 1.0;
  for (std::int32_t n = output.index; n >= 0; --n) {
    const double a = adj[static_cast<std::size_t>(n)];
    if (a == 0.0) continue;
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    for (std::int32_t e = node.first; e < node.first + node.count; ++e) {
      adj[static_cast<std::size_t>(parents_[static_cast<std::size_t>(e)])] +=
          a * partials_[static_cast<std::size_t>(e)];
    }
  }
  return adj;
}

std::vector<double> Tape::gradient(const Var& output, std::span<const Var> leaves) const {
  const std::vector<double> adj = adjoints(output);
  std::vector<double> grad(leaves.size(), 0.0);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (!leaves[i].is_constant()) grad[i] = adj[static_cast<std::size_t>(leaves[i].index)];
  }
  return grad;
}

void Tape::clear() {
  nodes_.clear();
  parents_.clear();
  partials_.clear();
}

void Tape::reserve(std::size_t nodes, std::size_t edges) {
  nodes_.reserve(nodes);
  parents_.reserve(edges);
  partials_.reserve(edges);
}

namespace {

thread_local std::vector<Var> scratch_parents;
thread_local std::vector<double> scratch_partials;

Tape* first_tape(std::span<const Var> xs) {
  for (const Var& x : xs) {
    if (x.tape != nullptr) return x.tape;
  }
  return nullptr;
}

}  // namespace

Var dot(std::span<const Var> a, std::span<const Var> b) {
  double value = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) value += a[i].value * b[i].value;
  Tape* t = first_tape(a);
  if (t == nullptr) t = first_tape(b);
  if (t == nullptr) return Var(value);
  scratch_parents.clear();
  scratch_partials.clear();
  for (std::size_t i = 0; i < a.size(); ++i) {
    scratch_parents.push_back(a[i]);
    scratch_partials.push_back(b[i].value);
    scratch_parents.push_back(b[i]);
    scratch_partials.push_back(a[i].value);
  }
  return t->record(value, scratch_parents, scratch_partials);
}

Var dot(std::span<const double> a, std::span<const Var> b) {
  double value = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) value += a[i] * b[i].value;
  Tape* t = first_tape(b);
  if (t == nullptr) return Var(value);
  return t->record(value, b, a);
}

Var sum(std::span<const Var> a) {
  double value = 0.0;
  for (const Var& x : a) value += x.value;
  Tape* t = first_tape(a);
  if (t == nullptr) return Var(value);
  scratch_partials.assign(a.size(), 1.0);
  return t->record(value, a, scratch_partials);
}

}  // namespace inform::ad
