// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>

#include "gpvortex/field.hpp"
#include "gpvortex/minres.hpp"
#include "gpvortex/radial.hpp"
#include "gpvortex/spectral.hpp"

namespace gpv {

/// The Townes profile on a 2D grid together with its radial source data.
struct KwongProfile {
  RadialProfile radial;
  RealField w;
  double a_star_radial = 0.0;
  double a_star_2d = 0.0;
  double pde_residual = 0.0; // ||lap w - w + w^3||_inf / ||w||_inf
  int polish_iterations = 0;

  double a_star() const { return a_star_2d; }
};

/// Average a field over the four parity reflections (i -> -i, j -> -j,
/// periodic images). Used to pin the rasterized profile to exact even-even
/// symmetry after spectral round trips.
inline void symmetrize_even_even(RealField& f) {
  const int nx = f.grid.nx, ny = f.grid.ny;
  for (int j = 0; j < ny; ++j) {
    const int jm = (ny - j) % ny;
    if (jm < j) continue;
    for (int i = 0; i < nx; ++i) {
      const int im = (nx - i) % nx;
      if (im < i) continue;
      const double avg = 0.25 * (f.at(i, j) + f.at(im, j) + f.at(i, jm) + f.at(im, jm));
      f.at(i, j) = f.at(im, j) = f.at(i, jm) = f.at(im, jm) = avg;
    }
  }
}

namespace kwong_detail {

inline RealField pde_residual_field(const RealField& w) {
  RealField res = laplacian(w);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double v = w.values[k];
    res.values[k] += -v + v * v * v;
  }
  return res;
}

// One Newton step for  -lap W + W - W^3 = 0  with the linearization solved by
// MINRES on the symmetrically preconditioned operator
// (k^2+1)^{-1/2} (-lap + 1 - 3 W^2) (k^2+1)^{-1/2}.
inline double newton_polish_step(RealField& w) {
  const GridSpec& g = w.grid;
  auto half_inv = [&](const RealField& f) {
    Spectrum s(f);
    return real_part(s.inverse([&](int i, int j) {
      const double k1 = g.k1(i), k2 = g.k2(j);
      return 1.0 / std::sqrt(k1 * k1 + k2 * k2 + 1.0);
    }));
  };

  RealField rhs_f = pde_residual_field(w); // = -(F) with F = -lap w + w - w^3
  RealField pre_rhs = half_inv(rhs_f);

  LinearMap apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    RealField z(g, in);
    RealField hz = half_inv(z);
    RealField az = laplacian(hz);
    for (std::size_t k = 0; k < az.size(); ++k) {
      const double wv = w.values[k];
      az.values[k] = -az.values[k] + (1.0 - 3.0 * wv * wv) * hz.values[k];
    }
    out = half_inv(az).values;
  };

  std::vector<double> y;
  auto stats = minres(apply, pre_rhs.values, y, 1e-13, 2000);
  (void)stats;
  RealField delta = half_inv(RealField(g, y));
  // residual field is -F, so Newton reads W <- W + delta
  w += delta;
  symmetrize_even_even(w);
  return sup_norm(pde_residual_field(w)) / sup_norm(w);
}

} // namespace kwong_detail

/// Sample w(|x|) onto the grid by cubic interpolation of the radial profile,
/// then (optionally) remove the interpolation error from the discrete PDE
/// residual with a couple of Newton steps.
inline KwongProfile rasterize(const RadialProfile& prof, const GridSpec& grid,
                              bool polish = true) {
  const double corner = std::hypot(grid.Lx, grid.Ly);
  if (corner > prof.r_max)
    throw ValidationError("rasterize: grid corner radius " + std::to_string(corner) +
                          " exceeds radial extent r_max=" + std::to_string(prof.r_max));

  KwongProfile kp{prof, RealField(grid), prof.a_star, 0.0, 0.0, 0};
  kp.w.fill([&](double x, double y) { return prof.eval(std::hypot(x, y)); });
  symmetrize_even_even(kp.w);

  kp.pde_residual = sup_norm(kwong_detail::pde_residual_field(kp.w)) / sup_norm(kp.w);
  if (polish) {
    for (int it = 0; it < 6 && kp.pde_residual > 1e-12; ++it) {
      kp.pde_residual = kwong_detail::newton_polish_step(kp.w);
      ++kp.polish_iterations;
    }
  }
  kp.a_star_2d = integrate(kp.w * kp.w);
  return kp;
}

/// Convenience: shoot and rasterize in one call.
inline KwongProfile compute_kwong(const GridSpec& grid, double tol = 1e-12,
                                  bool polish = true) {
  return rasterize(solve_kwong_radial(tol), grid, polish);
}

struct KwongIdentities {
  double grad_sq = 0.0;      // int |grad w|^2
  double mass = 0.0;         // int w^2
  double quartic_half = 0.0; // (1/2) int w^4
  double gn_ratio = 0.0;     // int w^4 * a* / (2 int |grad w|^2 int w^2)
};

/// Gagliardo-Nirenberg functional of an arbitrary trial state, normalized so
/// the Townes profile gives exactly 1 and everything else gives less.
inline double gn_ratio(const RealField& u, double a_star) {
  const double quartic = integrate(u * u * u * u);
  const double mass = integrate(u * u);
  const double kin = kinetic_energy(Spectrum(u));
  return quartic * a_star / (2.0 * kin * mass);
}

inline KwongIdentities verify_identities(const KwongProfile& kp) {
  KwongIdentities id;
  id.grad_sq = kinetic_energy(Spectrum(kp.w));
  id.mass = integrate(kp.w * kp.w);
  id.quartic_half = 0.5 * integrate(kp.w * kp.w * kp.w * kp.w);
  id.gn_ratio = gn_ratio(kp.w, kp.a_star_2d);
  return id;
}

/// int (x1^2 + Lambda^2 x2^2) w^2 on the grid; lambda0^4 of the trap.
inline double trap_quadratic_moment(const KwongProfile& kp, double Lambda) {
  const GridSpec& g = kp.w.grid;
  RealField integrand(g);
  for (int j = 0; j < g.ny; ++j) {
    const double y = g.x2(j);
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x1(i);
      const double wv = kp.w.at(i, j);
      integrand.at(i, j) = (x * x + Lambda * Lambda * y * y) * wv * wv;
    }
  }
  return integrate(integrand);
}

} // namespace gpv
