// SPDX-License-Identifier: Apache-2.0
#pragma once

// Minimal reverse-mode tape over scalars. Model code is written once as
// templates over a scalar type and instantiated with `double` (plain
// forward evaluation) or `ad::Var` (recorded for backpropagation).

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace inform::ad {

class Tape;

/// A recorded scalar. `index < 0` marks a constant that carries no gradient.
struct Var {
  double value = 0.0;
  std::int32_t index = -1;
  Tape* tape = nullptr;

  Var() = default;
  Var(double v) : value(v) {}  // NOLINT: constants convert implicitly
  Var(double v, std::int32_t i, Tape* t) : value(v), index(i), tape(t) {}

  bool is_constant() const noexcept { return index < 0; }

  Var& operator+=(const Var& o);
  Var& operator-=(const Var& o);
  Var& operator*=(const Var& o);
  Var& operator/=(const Var& o);
};

/// GradTape: single-owner recording of primitive applications. Not
/// thread-safe; use one tape per worker.
class Tape {
 public:
  /// Registers a differentiable leaf (a parameter or an input).
  Var variable(double value);

  /// Records an n-ary node; constant parents are dropped. Returns a
  /// constant when no parent is recorded.
  Var record(double value, std::span<const Var> parents, std::span<const double> partials);
  Var unary(double value, const Var& a, double da);
  Var binary(double value, const Var& a, double da, const Var& b, double db);

  /// Adjoint of every recorded node for d(output)/d(node).
  std::vector<double> adjoints(const Var& output) const;

  /// d(output)/d(leaf) for each leaf, in order. Leaves that do not reach
  /// the output get exactly zero.
  std::vector<double> gradient(const Var& output, std::span<const Var> leaves) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear();
  void reserve(std::size_t nodes, std::size_t edges);

 private:
  struct Node {
    std::int32_t first;
    std::int32_t count;
  };
  std::vector<Node> nodes_;
  std::vector<std::int32_t> parents_;
  std::vector<double> partials_;
};

namespace detail {
inline Tape* tape_of(const Var& a, const Var& b) { return a.tape != nullptr ? a.tape : b.tape; }
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  Tape* t = detail::tape_of(a, b);
  if (t == nullptr) return Var(a.value + b.value);
  return t->binary(a.value + b.value, a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  Tape* t = detail::tape_of(a, b);
  if (t == nullptr) return Var(a.value - b.value);
  return t->binary(a.value - b.value, a, 1.0, b, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  Tape* t = detail::tape_of(a, b);
  if (t == nullptr) return Var(a.value * b.value);
  return t->binary(a.value * b.value, a, b.value, b, a.value);
}
inline Var operator/(const Var& a, const Var& b) {
  Tape* t = detail::tape_of(a, b);
  const double q = a.value / b.value;
  if (t == nullptr) return Var(q);
  return t->binary(q, a, 1.0 / b.value, b, -q / b.value);
}
inline Var operator-(const Var& a) {
  if (a.tape == nullptr) return Var(-a.value);
  return a.tape->unary(-a.value, a, -1.0);
}

inline Var& Var::operator+=(const Var& o) { return *this = *this + o; }
inline Var& Var::operator-=(const Var& o) { return *this = *this - o; }
inline Var& Var::operator*=(const Var& o) { return *this = *this * o; }
inline Var& Var::operator/=(const Var& o) { return *this = *this / o; }

inline Var exp(const Var& a) {
  const double e = std::exp(a.value);
  if (a.tape == nullptr) return Var(e);
  return a.tape->unary(e, a, e);
}
inline Var log(const Var& a) {
  const double l = std::log(a.value);
  if (a.tape == nullptr) return Var(l);
  return a.tape->unary(l, a, 1.0 / a.value);
}
inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.value);
  if (a.tape == nullptr) return Var(s);
  return a.tape->unary(s, a, 0.5 / s);
}

inline double value_of(double x) noexcept { return x; }
inline double value_of(long double x) noexcept { return static_cast<double>(x); }
inline double value_of(const Var& x) noexcept { return x.value; }

/// Same value, no gradient path.
inline double stop_gradient(double x) noexcept { return x; }
inline long double stop_gradient(long double x) noexcept { return x; }
inline Var stop_gradient(const Var& x) noexcept { return Var(x.value); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
// Extended precision is only used for the finite-difference side of
// gradient checks.
inline long double dot(std::span<const long double> a, std::span<const long double> b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
Var dot(std::span<const Var> a, std::span<const Var> b);
Var dot(std::span<const double> a, std::span<const Var> b);
inline Var dot(std::span<const Var> a, std::span<const double> b) { return dot(b, a); }

inline double sum(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x;
  return s;
}
inline long double sum(std::span<const long double> a) {
  long double s = 0.0L;
  for (long double x : a) s += x;
  return s;
}
Var sum(std::span<const Var> a);

}  // namespace inform::ad
