// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "gpvortex/errors.hpp"

namespace gpv {

/// Radial profile of the positive ground state of  w'' + w'/r - w + w^3 = 0,
/// w'(0) = 0, w -> 0. Nodes are the accepted integrator steps plus a matched
/// Bessel-K0 tail; values between nodes come from cubic Hermite interpolation.
struct RadialProfile {
  std::vector<double> r;
  std::vector<double> w_of_r;
  std::vector<double> dw_of_r;
  double w0 = 0.0;     // w(0), the shooting parameter
  double a_star = 0.0; // 2 pi * int w^2 r dr
  double r_max = 0.0;
  double tol = 0.0;

  double eval(double rr) const { return hermite(rr, w_of_r, dw_of_r); }
  double eval_dw(double rr) const;

private:
  double hermite(double rr, const std::vector<double>& f, const std::vector<double>& df) const;
};

namespace radial_detail {

struct State {
  double w;
  double p; // w'
};

inline State rhs(double r, const State& s) {
  // at r = 0 the symmetric limit gives w'' = (w - w^3)/2 and w'/r -> w''
  if (r <= 0.0) return {s.p, 0.5 * (s.w - s.w * s.w * s.w)};
  return {s.p, s.w - s.w * s.w * s.w - s.p / r};
}

// Dormand-Prince 5(4) pair.
inline bool rk45_step(double r, const State& y, double h, State& out, double& err) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto fma2 = [](const State& y0, double h_, std::initializer_list<std::pair<double, const State*>> terms) {
    State s = y0;
    for (auto& [c, k] : terms) {
      s.w += h_ * c * k->w;
      s.p += h_ * c * k->p;
    }
    return s;
  };

  State k1 = rhs(r, y);
  State k2 = rhs(r + h / 5, fma2(y, h, {{a21, &k1}}));
  State k3 = rhs(r + 3 * h / 10, fma2(y, h, {{a31, &k1}, {a32, &k2}}));
  State k4 = rhs(r + 4 * h / 5, fma2(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  State k5 = rhs(r + 8 * h / 9, fma2(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  State k6 = rhs(r + h, fma2(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  out = fma2(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  State k7 = rhs(r + h, out);

  const double ew = h * (e1 * k1.w + e3 * k3.w + e4 * k4.w + e5 * k5.w + e6 * k6.w + e7 * k7.w);
  const double ep = h * (e1 * k1.p + e3 * k3.p + e4 * k4.p + e5 * k5.p + e6 * k6.p + e7 * k7.p);
  err = std::max(std::abs(ew), std::abs(ep));
  return std::isfinite(err);
}

enum class ShotOutcome { CrossedZero, TurnedUp, Decayed };

// Integrate from the series start with adaptive steps. Optionally record the
// accepted nodes. Classification: the shot crosses zero (w0 too large) or
// turns upward while still positive (w0 too small).
inline ShotOutcome shoot(double w0, double tol, double r_end,
                         std::vector<double>* rec_r = nullptr,
                         std::vector<double>* rec_w = nullptr,
                         std::vector<double>* rec_p = nullptr, double h_max = 0.05) {
  const double r0 = 1e-4;
  const double c2 = 0.25 * (w0 - w0 * w0 * w0);
  const double c4 = c2 * (1.0 - 3.0 * w0 * w0) / 16.0;
  State y{w0 + c2 * r0 * r0 + c4 * r0 * r0 * r0 * r0,
          2.0 * c2 * r0 + 4.0 * c4 * r0 * r0 * r0};
  double r = r0;
  double h = 1e-4;

  auto record = [&](double rr, const State& s) {
    if (rec_r) {
      rec_r->push_back(rr);
      rec_w->push_back(s.w);
      rec_p->push_back(s.p);
    }
  };
  if (rec_r) {
    rec_r->clear();
    rec_w->clear();
    rec_p->clear();
    record(0.0, State{w0, 0.0});
  }
  record(r, y);

  int rejects = 0;
  while (r < r_end) {
    h = std::min({h, h_max, r_end - r});
    State ynext;
    double err;
    if (!rk45_step(r, y, h, ynext, err)) return ShotOutcome::CrossedZero;
    const double scale = tol * (1.0 + std::abs(y.w));
    if (err <= scale || h <= 1e-12) {
      r += h;
      y = ynext;
      record(r, y);
      if (y.w <= 0.0) return ShotOutcome::CrossedZero;
      if (r > 1.0 && y.p >= 0.0) return ShotOutcome::TurnedUp;
      if (y.w > 1.5 * w0) return ShotOutcome::TurnedUp;
      rejects = 0;
    } else if (++rejects > 60) {
      throw ConvergenceError("radial shooting: step control stalled at r=" + std::to_string(r));
    }
    const double grow = 0.9 * std::pow(scale / std::max(err, 1e-300), 0.2);
    h *= std::clamp(grow, 0.2, 5.0);
  }
  return ShotOutcome::Decayed;
}

} // namespace radial_detail

inline double RadialProfile::hermite(double rr, const std::vector<double>& f,
                                     const std::vector<double>& df) const {
  if (rr <= 0.0) return f.front();
  if (rr >= r.back()) {
    // beyond the stored tail the profile is below everything we resolve
    return f.back() * std::exp(-(rr - r.back()));
  }
  auto it = std::upper_bound(r.begin(), r.end(), rr);
  const std::size_t i1 = static_cast<std::size_t>(it - r.begin());
  const std::size_t i0 = i1 - 1;
  const double h = r[i1] - r[i0];
  const double t = (rr - r[i0]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * f[i0] + h * h10 * df[i0] + h01 * f[i1] + h * h11 * df[i1];
}

inline double RadialProfile::eval_dw(double rr) const {
  // w'' from the equation gives the Hermite slopes for dw
  if (rr <= 0.0) return 0.0;
  if (rr >= r.back()) return -eval(rr);
  auto it = std::upper_bound(r.begin(), r.end(), rr);
  const std::size_t i1 = static_cast<std::size_t>(it - r.begin());
  const std::size_t i0 = i1 - 1;
  auto ddw = [&](std::size_t i) {
    const double ri = r[i];
    if (ri <= 0.0) return 0.5 * (w_of_r[i] - std::pow(w_of_r[i], 3));
    return w_of_r[i] - std::pow(w_of_r[i], 3) - dw_of_r[i] / ri;
  };
  const double h = r[i1] - r[i0];
  const double t = (rr - r[i0]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * dw_of_r[i0] + h * h10 * ddw(i0) + h01 * dw_of_r[i1] + h * h11 * ddw(i1);
}

/// 2 pi-free radial integral  int w(r)^power r^{rpow} dr  by composite Simpson
/// on a fine uniform resample of the Hermite interpolant.
inline double radial_moment(const RadialProfile& prof, int rpow, int power) {
  const double h = 0.002;
  const std::size_t n = static_cast<std::size_t>(std::ceil(prof.r_max / h / 2) * 2);
  const double step = prof.r_max / static_cast<double>(n);
  auto term = [&](std::size_t i) {
    const double rr = step * static_cast<double>(i);
    return std::pow(prof.eval(rr), power) * std::pow(rr, rpow);
  };
  double s = term(0) + term(n);
  for (std::size_t i = 1; i < n; i += 2) s += 4.0 * term(i);
  for (std::size_t i = 2; i < n; i += 2) s += 2.0 * term(i);
  return s * step / 3.0;
}

/// Shooting + bisection on w(0). Independent of the spectral stack; this is
/// the oracle for the critical mass and every radial moment downstream.
inline RadialProfile solve_kwong_radial(double tol, double r_max = 25.0) {
  if (!(tol > 1e-14 && tol < 1e-6))
    throw ValidationError("solve_kwong_radial: tol must lie in (1e-14, 1e-6)");

  using namespace radial_detail;
  double lo = 2.0, hi = 2.5;
  if (shoot(lo, tol, r_max) != ShotOutcome::TurnedUp ||
      shoot(hi, tol, r_max) != ShotOutcome::CrossedZero)
    throw ConvergenceError("solve_kwong_radial: bisection bracket [2, 2.5] invalid");

  for (int it = 0; it < 200 && (hi - lo) > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (shoot(mid, tol, r_max) == ShotOutcome::CrossedZero ? hi : lo) = mid;
  }
  const double w0 = 0.5 * (lo + hi);

  // Final pass with dense nodes; the shot is reliable to r_switch, beyond
  // which the exponentially growing mode contaminates double precision and
  // the matched K0 tail is accurate to O(e^{-2 r_switch}) relative.
  const double r_switch = 12.0;
  RadialProfile prof;
  prof.w0 = w0;
  prof.tol = tol;
  prof.r_max = r_max;
  shoot(w0, tol, r_switch, &prof.r, &prof.w_of_r, &prof.dw_of_r, 0.01);

  const double amp = prof.w_of_r.back() / std::cyl_bessel_k(0, prof.r.back());
  for (double rr = prof.r.back() + 0.01; rr <= r_max + 1e-9; rr += 0.01) {
    prof.r.push_back(rr);
    prof.w_of_r.push_back(amp * std::cyl_bessel_k(0, rr));
    prof.dw_of_r.push_back(-amp * std::cyl_bessel_k(1, rr));
  }

  prof.a_star = 2.0 * std::numbers::pi * radial_moment(prof, 1, 2);
  return prof;
}

} // namespace gpv
