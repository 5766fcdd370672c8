// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gpvortex/coefficients.hpp"
#include "gpvortex/minimize.hpp"
#include "gpvortex/psi_set.hpp"

namespace gpv {

/// Gauge-fixed rescaled state: recentered at the subgrid maximum of |u|,
/// rescaled by eps, momentum-gauged, and rotated to the phase minimizing the
/// L2 distance to w (which makes Im(v) orthogonal to w).
struct GaugeFit {
  double x_a1 = 0.0, x_a2 = 0.0; // physical-frame location of max |u|
  double theta_a = 0.0;          // phase in [0, 2 pi)
  double eps_a = 1.0;
  ComplexField v;          // gauge-fixed rescaled state, mass a*
  double orth_defect = 0.0; // |int w Im(v)| / (||w|| ||Im v||), 0 if Im v = 0
  double max_offset_cells = 0.0;

  double xa_norm() const { return std::hypot(x_a1, x_a2); }
};

namespace verify_detail {

// quadratic 3x3 subgrid fit around the max node; returns the offset in cells
inline std::pair<double, double> subgrid_offset(const RealField& f, int ci, int cj) {
  const GridSpec& g = f.grid;
  auto at = [&](int di, int dj) {
    const int i = (ci + di + g.nx) % g.nx;
    const int j = (cj + dj + g.ny) % g.ny;
    return f.at(i, j);
  };
  const double gx = 0.5 * (at(1, 0) - at(-1, 0));
  const double gy = 0.5 * (at(0, 1) - at(0, -1));
  const double hxx = at(1, 0) - 2 * at(0, 0) + at(-1, 0);
  const double hyy = at(0, 1) - 2 * at(0, 0) + at(0, -1);
  const double hxy = 0.25 * (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1));
  const double det = hxx * hyy - hxy * hxy;
  if (det == 0.0 || !(hxx < 0.0)) return {0.0, 0.0};
  double dx = -(hyy * gx - hxy * gy) / det;
  double dy = -(-hxy * gx + hxx * gy) / det;
  dx = std::clamp(dx, -1.0, 1.0);
  dy = std::clamp(dy, -1.0, 1.0);
  return {dx, dy};
}

// periodic bicubic (Catmull-Rom) sample of a complex field
inline cplx bicubic(const ComplexField& f, double x, double y) {
  const GridSpec& g = f.grid;
  const double fx = (x + g.Lx) / g.hx();
  const double fy = (y + g.Ly) / g.hy();
  const int ix = static_cast<int>(std::floor(fx));
  const int iy = static_cast<int>(std::floor(fy));
  const double tx = fx - ix, ty = fy - iy;
  auto wts = [](double t, double* w) {
    w[0] = 0.5 * (-t * t * t + 2 * t * t - t);
    w[1] = 0.5 * (3 * t * t * t - 5 * t * t + 2);
    w[2] = 0.5 * (-3 * t * t * t + 4 * t * t + t);
    w[3] = 0.5 * (t * t * t - t * t);
  };
  double wx[4], wy[4];
  wts(tx, wx);
  wts(ty, wy);
  cplx s = 0.0;
  for (int b = 0; b < 4; ++b) {
    const int j = ((iy + b - 1) % g.ny + g.ny) % g.ny;
    cplx row = 0.0;
    for (int a = 0; a < 4; ++a) {
      const int i = ((ix + a - 1) % g.nx + g.nx) % g.nx;
      row += wx[a] * f.at(i, j);
    }
    s += wy[b] * row;
  }
  return s;
}

} // namespace verify_detail

/// Fit the translation / phase / momentum gauge of a minimizer and return its
/// rescaled profile. Physical-frame inputs are resampled by bicubic
/// interpolation; rescaled-frame inputs only get the (tiny) subgrid
/// recentering as an exact Fourier shift.
inline GaugeFit fit_gauge(const ComplexField& u, const GPParams& p, const KwongProfile& kp,
                          Frame frame) {
  const GridSpec& g = u.grid;
  const double a_star = kp.a_star_2d;
  const double lam0 = std::pow(trap_quadratic_moment(kp, p.Lambda), 0.25);

  GaugeFit fit;
  fit.eps_a = std::pow(a_star - p.a, 0.25) / lam0;

  RealField mag = abs_field(u);
  std::size_t argmax = 0;
  for (std::size_t k = 1; k < mag.size(); ++k)
    if (mag.values[k] > mag.values[argmax]) argmax = k;
  const int ci = static_cast<int>(argmax) % g.nx;
  const int cj = static_cast<int>(argmax) / g.nx;
  const double peak = mag.values[argmax];

  // degenerate-fit guard: a second, non-adjacent candidate at the same height
  for (std::size_t k = 0; k < mag.size(); ++k) {
    if (mag.values[k] < peak * (1.0 - 1e-9)) continue;
    const int i = static_cast<int>(k) % g.nx;
    const int j = static_cast<int>(k) / g.nx;
    int di = std::abs(i - ci); di = std::min(di, g.nx - di);
    int dj = std::abs(j - cj); dj = std::min(dj, g.ny - dj);
    if (di > 2 || dj > 2)
      throw ConvergenceError(
          "fit_gauge: max of |u| is not unique; candidates at (" +
          std::to_string(g.x1(ci)) + ", " + std::to_string(g.x2(cj)) + ") and (" +
          std::to_string(g.x1(i)) + ", " + std::to_string(g.x2(j)) + ")");
  }

  auto [dx, dy] = verify_detail::subgrid_offset(mag, ci, cj);
  fit.max_offset_cells = std::hypot(dx, dy);
  const double xhat1 = g.x1(ci) + dx * g.hx();
  const double xhat2 = g.x2(cj) + dy * g.hy();

  ComplexField v(g);
  if (frame == Frame::Rescaled) {
    fit.x_a1 = fit.eps_a * xhat1;
    fit.x_a2 = fit.eps_a * xhat2;
    v = translate(u, -xhat1, -xhat2);
  } else {
    fit.x_a1 = xhat1;
    fit.x_a2 = xhat2;
    const double amp = fit.eps_a * std::sqrt(a_star);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        v.at(i, j) = amp * verify_detail::bicubic(u, fit.eps_a * g.x1(i) + fit.x_a1,
                                                  fit.eps_a * g.x2(j) + fit.x_a2);
  }

  // momentum gauge of the moving center: e^{-i (Omega/2) eps x . x_a_perp}
  if (p.Omega != 0.0 && (fit.x_a1 != 0.0 || fit.x_a2 != 0.0)) {
    const double c = 0.5 * p.Omega * fit.eps_a;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double phase = -c * (g.x1(i) * (-fit.x_a2) + g.x2(j) * fit.x_a1);
        v.at(i, j) *= std::exp(cplx(0.0, phase));
      }
  }

  // phase minimizing ||e^{i theta} v - w||_2
  const cplx overlap = g.cell_area() *
                       detail::pairwise_reduce<cplx>(0, g.size(), [&](std::size_t k) {
                         return kp.w.values[k] * v.values[k];
                       });
  double theta = -std::arg(overlap);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  const cplx rot = std::exp(cplx(0.0, theta));
  for (auto& z : v.values) z *= rot;
  fit.theta_a = theta;

  RealField iv = imag_part(v);
  const double ivn = l2_norm(iv);
  fit.orth_defect = ivn > 0.0 ? std::abs(inner(kp.w, iv)) / (l2_norm(kp.w) * ivn) : 0.0;
  fit.v = std::move(v);
  return fit;
}

// ---------------------------------------------------------------------------
// Vortex detection by plaquette phase winding.
// ---------------------------------------------------------------------------

struct Vortex {
  double x = 0.0, y = 0.0;
  int winding = 0;
};

struct VortexScan {
  std::vector<Vortex> vortices;
  double vortex_free_radius = 0.0;
  int total_winding = 0;         // sum of plaquette windings
  std::size_t skipped_plaquettes = 0; // corners below the magnitude floor
};

/// Accumulate wrapped phase differences around each grid plaquette; a nonzero
/// winding with all four corner magnitudes above threshold_rel * max|field|
/// flags a quantized vortex. Plaquettes with any corner below the floor are
/// excluded (the phase is undefined at numerical zero).
inline VortexScan vortex_scan(const ComplexField& f, double threshold_rel = 1e-12) {
  const GridSpec& g = f.grid;
  VortexScan scan;
  double fmax = 0.0;
  for (const auto& z : f.values) fmax = std::max(fmax, std::abs(z));
  const double floor = threshold_rel * fmax;

  double min_vortex_r = std::numeric_limits<double>::infinity();
  const double diag = 0.5 * std::hypot(g.hx(), g.hy());

  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      const cplx c00 = f.at(i, j), c10 = f.at(i + 1, j);
      const cplx c11 = f.at(i + 1, j + 1), c01 = f.at(i, j + 1);
      if (std::abs(c00) <= floor || std::abs(c10) <= floor || std::abs(c11) <= floor ||
          std::abs(c01) <= floor) {
        ++scan.skipped_plaquettes;
        continue;
      }
      const double s = std::arg(c10 * std::conj(c00)) + std::arg(c11 * std::conj(c10)) +
                       std::arg(c01 * std::conj(c11)) + std::arg(c00 * std::conj(c01));
      const int winding = static_cast<int>(std::lround(s / (2.0 * std::numbers::pi)));
      if (winding != 0) {
        Vortex v;
        v.x = g.x1(i) + 0.5 * g.hx();
        v.y = g.x2(j) + 0.5 * g.hy();
        v.winding = winding;
        scan.total_winding += winding;
        min_vortex_r = std::min(min_vortex_r, std::max(0.0, std::hypot(v.x, v.y) - diag));
        scan.vortices.push_back(v);
      }
    }

  double min_zero_r = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (std::abs(f.at(i, j)) == 0.0)
        min_zero_r = std::min(min_zero_r, std::hypot(g.x1(i), g.x2(j)));

  const double grid_radius = std::min(g.Lx - g.hx(), g.Ly - g.hy());
  scan.vortex_free_radius = std::min({grid_radius, min_vortex_r, min_zero_r});
  return scan;
}

/// Winding of the phase along the rectangular loop bounding the non-wrapping
/// plaquette sweep; equals the plaquette sum by telescoping.
inline int boundary_loop_winding(const ComplexField& f) {
  const GridSpec& g = f.grid;
  double s = 0.0;
  auto add = [&](int i0, int j0, int i1, int j1) {
    s += std::arg(f.at(i1, j1) * std::conj(f.at(i0, j0)));
  };
  for (int i = 0; i + 1 < g.nx; ++i) add(i, 0, i + 1, 0);
  for (int j = 0; j + 1 < g.ny; ++j) add(g.nx - 1, j, g.nx - 1, j + 1);
  for (int i = g.nx - 1; i > 0; --i) add(i, g.ny - 1, i - 1, g.ny - 1);
  for (int j = g.ny - 1; j > 0; --j) add(0, j, 0, j - 1);
  return static_cast<int>(std::lround(s / (2.0 * std::numbers::pi)));
}

// ---------------------------------------------------------------------------
// Expansion comparison.
// ---------------------------------------------------------------------------

struct ExpansionReport {
  double a = 0.0;
  double eps_a = 0.0;
  double beta_a = 0.0;     // 1 + mu_a eps^2
  double beta_ratio = 0.0; // beta_a / eps^4
  double c_star_ref = 0.0;
  double xa_norm = 0.0;
  double xa_over_eps5 = 0.0;
  double R_residual = 0.0;  // first order, sup norm / eps^4
  double I_residual = 0.0;  // sup norm / (eps^6 Omega), absolute if Omega = 0
  double second_order_residual = 0.0;
  double c_fit = 0.0;               // least-squares (w + x.grad w) coefficient
  double c_fit_over_eps4 = 0.0;     // the Theorem-style convention
  double minus_two_c_fit_over_eps4 = 0.0; // the beta-law convention
  double orth_defect = 0.0;
  double vortex_free_radius = 0.0;
  std::vector<Vortex> vortices;
  double decay_C1 = 0.0;
  bool decay_bounded = false;
};

/// Largest ratio |v - w| / (eps^4 |x|^{5/2} e^{-sqrt(1 - c eps^4)|x|}) over
/// 2 <= |x| <= 0.8 min(Lx, Ly); the fitted prefactor of the pointwise decay
/// envelope, which should stay bounded along an a-sweep.
inline std::pair<double, bool> decay_envelope_check(const GaugeFit& fit,
                                                    const KwongProfile& kp, double c_star) {
  const GridSpec& g = fit.v.grid;
  const double eps4 = std::pow(fit.eps_a, 4);
  const double rate = std::sqrt(std::max(0.5, 1.0 - std::abs(c_star) * eps4));
  const double rmax = 0.8 * std::min(g.Lx, g.Ly);
  double c1 = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double r = std::hypot(g.x1(i), g.x2(j));
      if (r < 2.0 || r > rmax) continue;
      const double dev = std::abs(fit.v.at(i, j) - kp.w.at(i, j));
      const double env = eps4 * std::pow(r, 2.5) * std::exp(-rate * r);
      c1 = std::max(c1, dev / env);
    }
  return {c1, std::isfinite(c1)};
}

/// Decompose a gauge-fixed state into w + R + iI and compare against the
/// psi-expansion at the given rotation speed. mu_hat is the frame multiplier
/// (mu_a eps^2 in the rescaled frame).
inline ExpansionReport decompose_and_compare(const GaugeFit& fit, const PsiSet& psis,
                                             const KwongProfile& kp, double mu_hat,
                                             double Omega, double c_star_ref) {
  require_same_grid(fit.v.grid, psis.psi1.grid, "decompose_and_compare");
  const GridSpec& g = fit.v.grid;

  ExpansionReport rep;
  rep.eps_a = fit.eps_a;
  const double eps2 = fit.eps_a * fit.eps_a;
  const double eps4 = eps2 * eps2;
  const double eps6 = eps4 * eps2;
  rep.beta_a = 1.0 + mu_hat;
  rep.beta_ratio = rep.beta_a / eps4;
  rep.c_star_ref = c_star_ref;
  rep.xa_norm = fit.xa_norm();
  rep.xa_over_eps5 = rep.xa_norm / std::pow(fit.eps_a, 5);
  rep.orth_defect = fit.orth_defect;

  RealField R = real_part(fit.v);
  R -= kp.w;
  RealField I = imag_part(fit.v);

  RealField psi3 = psis.psi3_at(Omega);
  double r1 = 0.0, r2 = 0.0, i1 = 0.0;
  const double beta = rep.beta_a;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double first = R.values[k] - eps4 * psis.psi1.values[k] - beta * psis.psi2.values[k];
    r1 = std::max(r1, std::abs(first));
    const double second = first - eps4 * eps4 * psi3.values[k] -
                          beta * beta * psis.psi4.values[k] -
                          eps4 * beta * psis.psi5.values[k];
    r2 = std::max(r2, std::abs(second));
    i1 = std::max(i1, std::abs(I.values[k] - eps6 * Omega * psis.psiI.values[k]));
  }
  rep.R_residual = r1 / eps4;
  const double denom2 = std::pow(eps4 + std::abs(beta), 2);
  rep.second_order_residual = r2 / denom2;
  rep.I_residual = Omega != 0.0 ? i1 / (eps6 * Omega) : sup_norm(I);

  // least-squares coefficient of (w + x.grad w) = -2 psi2 in R - eps^4 psi1
  RealField D = R;
  for (std::size_t k = 0; k < g.size(); ++k) D.values[k] -= eps4 * psis.psi1.values[k];
  RealField dir(g);
  for (std::size_t k = 0; k < g.size(); ++k) dir.values[k] = -2.0 * psis.psi2.values[k];
  rep.c_fit = inner(D, dir) / inner(dir, dir);
  rep.c_fit_over_eps4 = rep.c_fit / eps4;
  rep.minus_two_c_fit_over_eps4 = -2.0 * rep.c_fit / eps4;

  auto scan = vortex_scan(fit.v);
  rep.vortices = std::move(scan.vortices);
  rep.vortex_free_radius = scan.vortex_free_radius;

  auto [c1, bounded] = decay_envelope_check(fit, kp, c_star_ref);
  rep.decay_C1 = c1;
  rep.decay_bounded = bounded;
  return rep;
}

// ---------------------------------------------------------------------------
// Sweep driver.
// ---------------------------------------------------------------------------

struct SweepRow {
  double a = 0.0;
  double eps = 0.0;
  double mu = 0.0;
  double beta = 0.0;
  double beta_over_eps4 = 0.0;
  double c_star_ref = 0.0;
  double xa_norm = 0.0;
  double R_resid1 = 0.0;
  double R_resid2 = 0.0;
  double I_resid = 0.0;
  double vortex_free_radius = 0.0;
  double decay_C1 = 0.0;
  double orth_defect = 0.0;
  std::int64_t steps = 0;
  int newton_steps = 0;
  double final_residual = 0.0;
};

/// Minimize and verify at each interaction strength. Points run in the given
/// order; when sequential, each point seeds the next (continuation), which the
/// near-critical flow repays many times over.
inline std::vector<SweepRow> run_sweep(const std::vector<double>& a_list, const GPParams& base,
                                       const GridSpec& grid, const FlowConfig& cfg_in,
                                       const KwongProfile& kp, const PsiSet& psis,
                                       bool continuation = true) {
  const double c_ref = c_star(base.Lambda, kp, psis);
  std::vector<SweepRow> rows;
  std::optional<ComplexField> seed;
  for (double a : a_list) {
    GPParams p = base;
    p.a = a;
    FlowConfig cfg = cfg_in;
    if (continuation && seed) {
      cfg.init = InitKind::FromField;
      cfg.init_field = seed;
    }
    auto res = minimize(p, grid, cfg, kp);
    if (continuation) seed = res.field;

    auto fit = fit_gauge(res.field, p, kp, res.frame);
    auto rep = decompose_and_compare(fit, psis, kp, res.mu_hat, p.Omega, c_ref);

    SweepRow row;
    row.a = a;
    row.eps = fit.eps_a;
    row.mu = res.mu;
    row.beta = rep.beta_a;
    row.beta_over_eps4 = rep.beta_ratio;
    row.c_star_ref = c_ref;
    row.xa_norm = rep.xa_norm;
    row.R_resid1 = rep.R_residual;
    row.R_resid2 = rep.second_order_residual;
    row.I_resid = rep.I_residual;
    row.vortex_free_radius = rep.vortex_free_radius;
    row.decay_C1 = rep.decay_C1;
    row.orth_defect = rep.orth_defect;
    row.steps = res.steps;
    row.newton_steps = res.newton_steps;
    row.final_residual = res.final_residual;
    rows.push_back(row);
  }
  return rows;
}

/// Least-squares slope of log(y) against log(x); the observed convergence
/// order of a sweep quantity.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return 0.0;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace gpv
