// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "gpvortex/errors.hpp"

namespace gpv {

/// Uniform tensor grid on the periodic box [-Lx, Lx) x [-Ly, Ly).
///
/// Points along x1 are x1(i) = -Lx + i*hx with hx = 2 Lx / nx, so the origin
/// is the grid node (nx/2, ny/2) exactly. Samples are stored row-major with
/// x1 fastest. Point counts must be even so the Nyquist mode is unambiguous;
/// it is zeroed in odd-order spectral derivatives.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double Lx = 0.0;
  double Ly = 0.0;

  GridSpec() = default;
  GridSpec(int nx_, int ny_, double Lx_, double Ly_)
      : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_) {
    validate();
  }
  /// Square grid on [-L, L)^2.
  GridSpec(int n, double L) : GridSpec(n, n, L, L) {}

  void validate() const {
    if (nx < 16 || ny < 16)
      throw ValidationError("grid: nx, ny must be >= 16 (got " +
                            std::to_string(nx) + " x " + std::to_string(ny) + ")");
    if (nx % 2 != 0 || ny % 2 != 0)
      throw ValidationError("grid: nx, ny must be even for spectral differentiation");
    if (!(Lx > 0.0) || !(Ly > 0.0))
      throw ValidationError("grid: half-widths Lx, Ly must be positive");
  }

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  double hx() const { return 2.0 * Lx / nx; }
  double hy() const { return 2.0 * Ly / ny; }
  double cell_area() const { return hx() * hy(); }

  double x1(int i) const { return -Lx + i * hx(); }
  double x2(int j) const { return -Ly + j * hy(); }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * nx + i;
  }
  int origin_i() const { return nx / 2; }
  int origin_j() const { return ny / 2; }
  std::size_t origin_index() const { return index(origin_i(), origin_j()); }

  /// Signed integer frequency for bin i of an n-point transform.
  static int freq(int i, int n) { return (i < n / 2) ? i : i - n; }

  /// Wavenumbers of the Fourier basis e^{i(k1 x1 + k2 x2)}.
  double k1(int i) const { return std::numbers::pi / Lx * freq(i, nx); }
  double k2(int j) const { return std::numbers::pi / Ly * freq(j, ny); }

  bool operator==(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && Lx == o.Lx && Ly == o.Ly;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b,
                              const char* what) {
  if (a != b)
    throw GridMismatchError(std::string(what) + ": operand grids differ (" +
                            std::to_string(a.nx) + "x" + std::to_string(a.ny) +
                            " vs " + std::to_string(b.nx) + "x" +
                            std::to_string(b.ny) + ")");
}

} // namespace gpv
