// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "gpvortex/fft.hpp"
#include "gpvortex/field.hpp"

namespace gpv {

/// Fourier coefficients of a field (unnormalized forward transform).
class Spectrum {
public:
  explicit Spectrum(const ComplexField& f) : grid(f.grid), coef(f.size()) {
    Fft2::get(grid).forward(f.values.data(), coef.data());
  }
  explicit Spectrum(const RealField& f) : Spectrum(to_complex(f)) {}

  /// Inverse transform of symbol(k1, k2) * coef, normalized.
  template <typename Symbol>
  ComplexField inverse(Symbol&& symbol) const {
    std::vector<cplx> tmp(coef.size());
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        const std::size_t k = grid.index(i, j);
        tmp[k] = symbol(i, j) * coef[k] * scale;
      }
    ComplexField out(grid);
    Fft2::get(grid).backward(tmp.data(), out.values.data());
    return out;
  }

  GridSpec grid;
  std::vector<cplx> coef;
};

namespace detail {

/// ik multiplier for a first derivative; the Nyquist bin is zeroed because it
/// has no well-defined sign of k on an even grid.
inline cplx d1_symbol(const GridSpec& g, int i) {
  if (i == g.nx / 2) return {0.0, 0.0};
  return {0.0, g.k1(i)};
}
inline cplx d2_symbol(const GridSpec& g, int j) {
  if (j == g.ny / 2) return {0.0, 0.0};
  return {0.0, g.k2(j)};
}

} // namespace detail

inline ComplexField derivative_x1(const ComplexField& f) {
  Spectrum s(f);
  return s.inverse([&](int i, int) { return detail::d1_symbol(f.grid, i); });
}
inline ComplexField derivative_x2(const ComplexField& f) {
  Spectrum s(f);
  return s.inverse([&](int, int j) { return detail::d2_symbol(f.grid, j); });
}
inline RealField derivative_x1(const RealField& f) { return real_part(derivative_x1(to_complex(f))); }
inline RealField derivative_x2(const RealField& f) { return real_part(derivative_x2(to_complex(f))); }

inline std::pair<ComplexField, ComplexField> gradient(const ComplexField& f) {
  Spectrum s(f);
  auto gx = s.inverse([&](int i, int) { return detail::d1_symbol(f.grid, i); });
  auto gy = s.inverse([&](int, int j) { return detail::d2_symbol(f.grid, j); });
  return {std::move(gx), std::move(gy)};
}
inline std::pair<RealField, RealField> gradient(const RealField& f) {
  auto [gx, gy] = gradient(to_complex(f));
  return {real_part(gx), real_part(gy)};
}

inline ComplexField laplacian(const ComplexField& f) {
  Spectrum s(f);
  return s.inverse([&](int i, int j) {
    const double k1 = f.grid.k1(i), k2 = f.grid.k2(j);
    return -(k1 * k1 + k2 * k2);
  });
}
inline RealField laplacian(const RealField& f) { return real_part(laplacian(to_complex(f))); }

namespace detail {

// Coordinate value used in x .* gradient products. The seam node i = 0 sits on
// the sawtooth jump of the periodic coordinate; its odd-symmetric value is 0,
// which keeps these operators exactly parity-preserving on the grid.
inline double odd_coord(const GridSpec& g, int axis, int idx) {
  if (idx == 0) return 0.0;
  return axis == 0 ? g.x1(idx) : g.x2(idx);
}

} // namespace detail

/// x-perp . grad f = -x2 d1(f) + x1 d2(f): the angular derivative entering the
/// rotation term. Annihilates radial fields.
template <typename T>
Field<T> angular_derivative(const Field<T>& f) {
  auto [gx, gy] = gradient(f);
  Field<T> out(f.grid);
  for (int j = 0; j < f.grid.ny; ++j) {
    const double y = detail::odd_coord(f.grid, 1, j);
    for (int i = 0; i < f.grid.nx; ++i) {
      const std::size_t k = f.grid.index(i, j);
      out.values[k] = -y * gx.values[k] + detail::odd_coord(f.grid, 0, i) * gy.values[k];
    }
  }
  return out;
}

/// x . grad f (radial scaling derivative).
template <typename T>
Field<T> scaling_derivative(const Field<T>& f) {
  auto [gx, gy] = gradient(f);
  Field<T> out(f.grid);
  for (int j = 0; j < f.grid.ny; ++j) {
    const double y = detail::odd_coord(f.grid, 1, j);
    for (int i = 0; i < f.grid.nx; ++i) {
      const std::size_t k = f.grid.index(i, j);
      out.values[k] = detail::odd_coord(f.grid, 0, i) * gx.values[k] + y * gy.values[k];
    }
  }
  return out;
}

/// (-Delta + shift)^{-1} f, shift > 0.
inline ComplexField helmholtz_solve(const ComplexField& f, double shift) {
  Spectrum s(f);
  return s.inverse([&](int i, int j) {
    const double k1 = f.grid.k1(i), k2 = f.grid.k2(j);
    return 1.0 / (k1 * k1 + k2 * k2 + shift);
  });
}
inline RealField helmholtz_solve(const RealField& f, double shift) {
  return real_part(helmholtz_solve(to_complex(f), shift));
}

/// Kinetic energy integral |grad f|^2 via Parseval on the coefficients.
inline double kinetic_energy(const Spectrum& s) {
  const GridSpec& g = s.grid;
  const double w = g.cell_area() / static_cast<double>(g.size());
  return w * detail::pairwise_reduce<double>(0, s.coef.size(), [&](std::size_t k) {
           const int i = static_cast<int>(k) % g.nx;
           const int j = static_cast<int>(k) / g.nx;
           const double k1 = g.k1(i), k2 = g.k2(j);
           return (k1 * k1 + k2 * k2) * std::norm(s.coef[k]);
         });
}

/// Translate a field by (sx, sy) with the exact Fourier phase shift.
inline ComplexField translate(const ComplexField& f, double sx, double sy) {
  Spectrum s(f);
  return s.inverse([&](int i, int j) {
    const double k1 = f.grid.k1(i), k2 = f.grid.k2(j);
    return std::exp(cplx(0.0, -(k1 * sx + k2 * sy)));
  });
}

} // namespace gpv
