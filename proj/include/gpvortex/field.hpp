// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gpvortex/errors.hpp"
#include "gpvortex/grid.hpp"

namespace gpv {

using cplx = std::complex<double>;

/// Scalar samples on a GridSpec, row-major with x1 fastest.
///
/// Fields are plain values: copyable, comparable by samples, no shared state.
/// Every binary operation requires identical grids.
template <typename T>
struct Field {
  GridSpec grid;
  std::vector<T> values;

  Field() = default;
  explicit Field(const GridSpec& g, T fill = T{}) : grid(g), values(g.size(), fill) {}
  Field(const GridSpec& g, std::vector<T> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw ValidationError("field: sample count " + std::to_string(values.size()) +
                            " does not match grid size " + std::to_string(grid.size()));
  }

  T& at(int i, int j) { return values[grid.index(i, j)]; }
  const T& at(int i, int j) const { return values[grid.index(i, j)]; }
  std::size_t size() const { return values.size(); }

  /// Fill from a function of the physical coordinates.
  template <typename F>
  void fill(F&& f) {
    for (int j = 0; j < grid.ny; ++j) {
      const double y = grid.x2(j);
      for (int i = 0; i < grid.nx; ++i)
        values[grid.index(i, j)] = f(grid.x1(i), y);
    }
  }
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

template <typename F>
RealField make_real_field(const GridSpec& g, F&& f) {
  RealField out(g);
  out.fill(std::forward<F>(f));
  return out;
}

template <typename F>
ComplexField make_complex_field(const GridSpec& g, F&& f) {
  ComplexField out(g);
  out.fill(std::forward<F>(f));
  return out;
}

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const cplx& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

template <typename T>
void require_finite(const Field<T>& f, const char* what) {
  for (std::size_t k = 0; k < f.values.size(); ++k)
    if (!is_finite(f.values[k]))
      throw NonFiniteError(std::string(what) + ": non-finite sample at flat index " +
                               std::to_string(k) + " (i=" +
                               std::to_string(k % f.grid.nx) + ", j=" +
                               std::to_string(k / f.grid.nx) + ")",
                           k);
}

// ---------------------------------------------------------------------------
// Deterministic reductions.
//
// All quadrature and inner products reduce through a fixed pairwise tree, so
// results are bit-identical across runs and independent of any threading in
// the surrounding code.
// ---------------------------------------------------------------------------

namespace detail {

template <typename Acc, typename TermFn>
Acc pairwise_reduce(std::size_t lo, std::size_t hi, const TermFn& term) {
  if (hi - lo <= 32) {
    Acc s{};
    for (std::size_t k = lo; k < hi; ++k) s += term(k);
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_reduce<Acc>(lo, mid, term) + pairwise_reduce<Acc>(mid, hi, term);
}

} // namespace detail

inline double pairwise_sum(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return detail::pairwise_reduce<double>(0, v.size(), [&](std::size_t k) { return v[k]; });
}

/// hx*hy * sum of samples: exact-weight quadrature on the periodic box.
inline double integrate(const RealField& f) {
  require_finite(f, "integrate");
  return f.grid.cell_area() *
         detail::pairwise_reduce<double>(0, f.size(), [&](std::size_t k) { return f.values[k]; });
}

/// Integral of |f|^2 for complex samples.
inline double integrate_abs2(const ComplexField& f) {
  require_finite(f, "integrate");
  return f.grid.cell_area() * detail::pairwise_reduce<double>(0, f.size(), [&](std::size_t k) {
           return std::norm(f.values[k]);
         });
}

/// L2 inner product with quadrature weight, real fields.
inline double inner(const RealField& a, const RealField& b) {
  require_same_grid(a.grid, b.grid, "inner");
  return a.grid.cell_area() * detail::pairwise_reduce<double>(0, a.size(), [&](std::size_t k) {
           return a.values[k] * b.values[k];
         });
}

/// Hermitian inner product <a, b> = integral of conj(a) b.
inline cplx inner(const ComplexField& a, const ComplexField& b) {
  require_same_grid(a.grid, b.grid, "inner");
  return a.grid.cell_area() * detail::pairwise_reduce<cplx>(0, a.size(), [&](std::size_t k) {
           return std::conj(a.values[k]) * b.values[k];
         });
}

inline double l2_norm(const RealField& f) { return std::sqrt(inner(f, f)); }
inline double l2_norm(const ComplexField& f) { return std::sqrt(integrate_abs2(f)); }

template <typename T>
double sup_norm(const Field<T>& f) {
  double m = 0.0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// Elementwise arithmetic.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T, typename U, typename Op>
auto zip(const Field<T>& a, const Field<U>& b, Op op) {
  require_same_grid(a.grid, b.grid, "field arithmetic");
  using R = decltype(op(a.values[0], b.values[0]));
  Field<R> out(a.grid);
  for (std::size_t k = 0; k < a.size(); ++k) out.values[k] = op(a.values[k], b.values[k]);
  return out;
}

} // namespace detail

template <typename T, typename U>
auto operator+(const Field<T>& a, const Field<U>& b) {
  return detail::zip(a, b, [](auto x, auto y) { return x + y; });
}
template <typename T, typename U>
auto operator-(const Field<T>& a, const Field<U>& b) {
  return detail::zip(a, b, [](auto x, auto y) { return x - y; });
}
template <typename T, typename U>
auto operator*(const Field<T>& a, const Field<U>& b) {
  return detail::zip(a, b, [](auto x, auto y) { return x * y; });
}

template <typename T, typename S>
  requires(std::is_arithmetic_v<S> || std::is_same_v<S, cplx>)
auto operator*(S s, const Field<T>& a) {
  Field<decltype(s * a.values[0])> out(a.grid);
  for (std::size_t k = 0; k < a.size(); ++k) out.values[k] = s * a.values[k];
  return out;
}
template <typename T, typename S>
  requires(std::is_arithmetic_v<S> || std::is_same_v<S, cplx>)
auto operator*(const Field<T>& a, S s) {
  return s * a;
}

template <typename T>
Field<T>& operator+=(Field<T>& a, const Field<T>& b) {
  require_same_grid(a.grid, b.grid, "field arithmetic");
  for (std::size_t k = 0; k < a.size(); ++k) a.values[k] += b.values[k];
  return a;
}
template <typename T>
Field<T>& operator-=(Field<T>& a, const Field<T>& b) {
  require_same_grid(a.grid, b.grid, "field arithmetic");
  for (std::size_t k = 0; k < a.size(); ++k) a.values[k] -= b.values[k];
  return a;
}
template <typename T>
Field<T>& operator*=(Field<T>& a, double s) {
  for (auto& v : a.values) v *= s;
  return a;
}

inline RealField real_part(const ComplexField& f) {
  RealField out(f.grid);
  for (std::size_t k = 0; k < f.size(); ++k) out.values[k] = f.values[k].real();
  return out;
}
inline RealField imag_part(const ComplexField& f) {
  RealField out(f.grid);
  for (std::size_t k = 0; k < f.size(); ++k) out.values[k] = f.values[k].imag();
  return out;
}
inline RealField abs_field(const ComplexField& f) {
  RealField out(f.grid);
  for (std::size_t k = 0; k < f.size(); ++k) out.values[k] = std::abs(f.values[k]);
  return out;
}
inline ComplexField to_complex(const RealField& f) {
  ComplexField out(f.grid);
  for (std::size_t k = 0; k < f.size(); ++k) out.values[k] = cplx(f.values[k], 0.0);
  return out;
}

/// Coordinate sample fields x1 and x2.
inline RealField coordinate_field(const GridSpec& g, int axis) {
  return make_real_field(g, [axis](double x, double y) { return axis == 0 ? x : y; });
}
inline RealField radius2_field(const GridSpec& g) {
  return make_real_field(g, [](double x, double y) { return x * x + y * y; });
}

} // namespace gpv
