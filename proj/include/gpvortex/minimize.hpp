// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpvortex/kwong.hpp"
#include "gpvortex/minres.hpp"
#include "gpvortex/spectral.hpp"

namespace gpv {

/// Physical parameters of the rotating GP problem with trap
/// V(x) = x1^2 + Lambda^2 x2^2.
struct GPParams {
  double a = 0.0;      // interaction strength, 0 <= a < a* for minimization
  double Lambda = 1.0; // anisotropy in (0, 1]
  double Omega = 0.0;  // rotation speed, 0 <= Omega < 2 min(1, Lambda)
  double trap_x1 = 0.0; // trap center offset (used by translation controls)
  double trap_x2 = 0.0;

  double omega_star() const { return 2.0 * std::min(1.0, Lambda); }

  void validate(double a_star, bool require_subcritical = true) const {
    if (!(Lambda > 0.0 && Lambda <= 1.0))
      throw ValidationError("params: Lambda must lie in (0, 1]");
    if (Omega < 0.0 || Omega >= omega_star())
      throw ValidationError("params: Omega=" + std::to_string(Omega) +
                            " must satisfy 0 <= Omega < Omega* = 2 min(1, Lambda) = " +
                            std::to_string(omega_star()) +
                            "; beyond it the effective trap no longer confines");
    if (a < 0.0) throw ValidationError("params: a must be nonnegative");
    if (require_subcritical && a >= a_star)
      throw ValidationError("params: a=" + std::to_string(a) + " >= a* = " +
                            std::to_string(a_star) +
                            "; no ground state exists at or above the critical mass, "
                            "minimization requires a < a*");
  }
};

enum class Frame { Physical, Rescaled };
enum class InitKind { Gaussian, KwongSeeded, FromField };

struct FlowConfig {
  double dt = 1e-3;
  double tol_energy = 1e-12;
  double tol_residual = 1e-9;
  std::int64_t max_steps = 2'000'000;
  Frame frame = Frame::Rescaled;
  InitKind init = InitKind::KwongSeeded;
  std::optional<ComplexField> init_field;

  // Newton polish of the flow's output; without it, near-critical soft modes
  // relax at a rate ~ eps^4 per unit time and the flow alone cannot reach
  // tol_residual in any reasonable step budget.
  bool polish = true;
  double handoff_residual = 1e-4;
  int max_newton_steps = 30;

  double collapse_width_cells = 4.0;
};

/// Frame-dependent constants of the unified equation
///   -lap phi + W phi + i Omega_eff (x-perp . grad phi) = mu phi + g |phi|^2 phi
/// under mass m0: the physical problem itself, or the blown-up problem whose
/// mass is a* and whose trap is eps^4 V.
struct FrameSetup {
  Frame frame = Frame::Physical;
  GPParams params;
  double eps = 1.0; // (a* - a)^{1/4} / lambda0 in the rescaled frame, else 1
  double a_star = 0.0;
  double lambda0 = 0.0;
  double omega_eff = 0.0;
  double g_nl = 0.0;
  double m0 = 1.0;
  RealField W; // trap term of the frame

  static FrameSetup make(const GPParams& p, const GridSpec& grid, const KwongProfile& kp,
                         Frame frame, bool require_subcritical = true) {
    FrameSetup s;
    s.frame = frame;
    s.params = p;
    s.a_star = kp.a_star_2d;
    s.lambda0 = std::pow(trap_quadratic_moment(kp, p.Lambda), 0.25);
    p.validate(s.a_star, require_subcritical);
    if (frame == Frame::Rescaled) {
      if (p.a >= s.a_star)
        throw ValidationError("rescaled frame requires a < a*");
      s.eps = std::pow(s.a_star - p.a, 0.25) / s.lambda0;
      s.omega_eff = s.eps * s.eps * p.Omega;
      s.g_nl = p.a / s.a_star;
      s.m0 = s.a_star;
    } else {
      s.eps = 1.0;
      s.omega_eff = p.Omega;
      s.g_nl = p.a;
      s.m0 = 1.0;
    }
    const double scale = frame == Frame::Rescaled ? std::pow(s.eps, 4) : 1.0;
    const double cx = frame == Frame::Rescaled ? p.trap_x1 / s.eps : p.trap_x1;
    const double cy = frame == Frame::Rescaled ? p.trap_x2 / s.eps : p.trap_x2;
    s.W = make_real_field(grid, [&](double x, double y) {
      const double u = x - cx, v = y - cy;
      return scale * (u * u + p.Lambda * p.Lambda * v * v);
    });
    return s;
  }
};

namespace flow_detail {

// Frame energy, EL application and Rayleigh quotient share one workspace so
// the flow costs 5 transforms per step (3 when Omega_eff = 0).
struct Workspace {
  GridSpec grid;
  std::vector<cplx> hat, d1, d2, lap, scratch;

  explicit Workspace(const GridSpec& g)
      : grid(g), hat(g.size()), d1(g.size()), d2(g.size()), lap(g.size()), scratch(g.size()) {}

  void transforms(const ComplexField& phi, bool need_gradients, bool need_lap = true) {
    const auto& fft = Fft2::get(grid);
    fft.forward(phi.values.data(), hat.data());
    const double scale = 1.0 / static_cast<double>(grid.size());
    if (need_lap) {
      for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
          const std::size_t k = grid.index(i, j);
          const double k1 = grid.k1(i), k2 = grid.k2(j);
          scratch[k] = -(k1 * k1 + k2 * k2) * scale * hat[k];
        }
      fft.backward(scratch.data(), lap.data());
    }
    if (need_gradients) {
      for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
          const std::size_t k = grid.index(i, j);
          scratch[k] = detail::d1_symbol(grid, i) * scale * hat[k];
        }
      fft.backward(scratch.data(), d1.data());
      for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
          const std::size_t k = grid.index(i, j);
          scratch[k] = detail::d2_symbol(grid, j) * scale * hat[k];
        }
      fft.backward(scratch.data(), d2.data());
    }
  }

  // x-perp . grad phi at sample k (gradients must be current)
  cplx rot(std::size_t k, int i, int j) const {
    const double x = detail::odd_coord(grid, 0, i);
    const double y = detail::odd_coord(grid, 1, j);
    return -y * d1[k] + x * d2[k];
  }
};

struct EnergyTerms {
  double kinetic = 0.0;
  double trap = 0.0;
  double quartic = 0.0;  // int |phi|^4
  double rotation = 0.0; // int x-perp . (i phi, grad phi)
  double total(double g_nl, double omega_eff) const {
    return kinetic + trap - 0.5 * g_nl * quartic - omega_eff * rotation;
  }
};

inline EnergyTerms energy_terms(const ComplexField& phi, const FrameSetup& s, Workspace& ws) {
  const GridSpec& g = phi.grid;
  ws.transforms(phi, true);
  EnergyTerms et;
  const double scale = 1.0 / static_cast<double>(g.size());
  et.kinetic = g.cell_area() * scale *
               detail::pairwise_reduce<double>(0, g.size(), [&](std::size_t k) {
                 const int i = static_cast<int>(k) % g.nx;
                 const int j = static_cast<int>(k) / g.nx;
                 const double k1 = g.k1(i), k2 = g.k2(j);
                 return (k1 * k1 + k2 * k2) * std::norm(ws.hat[k]);
               });
  et.trap = g.cell_area() * detail::pairwise_reduce<double>(0, g.size(), [&](std::size_t k) {
    return s.W.values[k] * std::norm(phi.values[k]);
  });
  et.quartic = g.cell_area() * detail::pairwise_reduce<double>(0, g.size(), [&](std::size_t k) {
    const double n = std::norm(phi.values[k]);
    return n * n;
  });
  et.rotation = g.cell_area() * detail::pairwise_reduce<double>(0, g.size(), [&](std::size_t k) {
    const int i = static_cast<int>(k) % g.nx;
    const int j = static_cast<int>(k) / g.nx;
    // (i phi, grad phi) = Im(conj(phi) grad phi)
    const cplx r = ws.rot(k, i, j);
    return std::imag(std::conj(phi.values[k]) * r);
  });
  return et;
}

// T(phi) = -lap phi + W phi + i Omega_eff (x-perp . grad phi) - g |phi|^2 phi
inline ComplexField el_apply(const ComplexField& phi, const FrameSetup& s, Workspace& ws) {
  const GridSpec& g = phi.grid;
  ws.transforms(phi, s.omega_eff != 0.0);
  ComplexField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      cplx v = -ws.lap[k] + s.W.values[k] * phi.values[k] -
               s.g_nl * std::norm(phi.values[k]) * phi.values[k];
      if (s.omega_eff != 0.0) v += cplx(0.0, s.omega_eff) * ws.rot(k, i, j);
      out.values[k] = v;
    }
  return out;
}

inline double rayleigh_mu(const ComplexField& phi, const ComplexField& t_phi, double m0) {
  return std::real(inner(phi, t_phi)) / m0;
}

inline double el_residual_norm(const ComplexField& phi, const ComplexField& t_phi, double mu) {
  ComplexField r(phi.grid);
  for (std::size_t k = 0; k < r.size(); ++k) r.values[k] = t_phi.values[k] - mu * phi.values[k];
  return l2_norm(r) / l2_norm(phi);
}

inline void renormalize(ComplexField& phi, double m0) {
  const double m = integrate_abs2(phi);
  const double s = std::sqrt(m0 / m);
  for (auto& v : phi.values) v *= s;
}

/// peak-based width in units of grid cells: sqrt(mass / max|phi|^2) / sqrt(hx hy)
inline double width_cells(const ComplexField& phi, double m0) {
  double peak = 0.0;
  for (const auto& v : phi.values) peak = std::max(peak, std::norm(v));
  return std::sqrt(m0 / peak) / std::sqrt(phi.grid.cell_area());
}

inline double rms_width(const ComplexField& phi) {
  const GridSpec& g = phi.grid;
  RealField r2 = radius2_field(g);
  const double m = integrate_abs2(phi);
  const double second = g.cell_area() *
                        detail::pairwise_reduce<double>(0, g.size(), [&](std::size_t k) {
                          return r2.values[k] * std::norm(phi.values[k]);
                        });
  return std::sqrt(second / m);
}

} // namespace flow_detail

/// Rotating GP energy of a mass-1 state in the physical frame. Set
/// require_unit_mass = false for finite-difference probes around a state.
inline double energy(const ComplexField& u, const GPParams& p, const KwongProfile& kp,
                     bool require_unit_mass = true) {
  if (require_unit_mass) {
    const double m = integrate_abs2(u);
    if (std::abs(m - 1.0) > 1e-8)
      throw ValidationError("energy: mass " + std::to_string(m) +
                            " violates the unit constraint");
  }
  auto s = FrameSetup::make(p, u.grid, kp, Frame::Physical, false);
  flow_detail::Workspace ws(u.grid);
  auto et = flow_detail::energy_terms(u, s, ws);
  return et.total(s.g_nl, s.omega_eff);
}

/// L2 gradient of the energy functional: 2 T(u). The normalized flow descends
/// along -T(u) + mu u; this is the object the finite-difference check probes.
inline ComplexField energy_gradient(const ComplexField& u, const GPParams& p,
                                    const KwongProfile& kp) {
  auto s = FrameSetup::make(p, u.grid, kp, Frame::Physical, false);
  flow_detail::Workspace ws(u.grid);
  ComplexField t = flow_detail::el_apply(u, s, ws);
  for (auto& v : t.values) v *= 2.0;
  return t;
}

struct MinimizerResult {
  ComplexField field; // frame-native state (mass 1 physical, mass a* rescaled)
  Frame frame = Frame::Physical;
  GPParams params;
  double eps = 1.0;
  double energy = 0.0;       // physical e_F(a)
  double energy_frame = 0.0; // frame functional value
  double mu = 0.0;           // physical chemical potential, from the energy relation
  double mu_hat = 0.0;       // frame multiplier; mu * eps^2 in the rescaled frame
  double mass = 0.0;
  std::int64_t steps = 0;
  int newton_steps = 0;
  double final_residual = 0.0;
  double min_flow_energy = 0.0;
  bool energy_monotone = true;
  double max_energy_rise = 0.0;
  double width_cells = 0.0;
  double rms_width = 0.0;
};

namespace flow_detail {

inline ComplexField initial_state(const FrameSetup& s, const GridSpec& grid,
                                  const KwongProfile& kp, const FlowConfig& cfg) {
  ComplexField phi(grid);
  switch (cfg.init) {
    case InitKind::KwongSeeded:
      phi = to_complex(kp.w);
      break;
    case InitKind::Gaussian: {
      const double lam = s.params.Lambda;
      phi = make_complex_field(grid, [&](double x, double y) {
        return cplx(std::exp(-0.5 * (x * x + lam * y * y)), 0.0);
      });
      break;
    }
    case InitKind::FromField:
      if (!cfg.init_field) throw ValidationError("init=FromField but no field supplied");
      require_same_grid(cfg.init_field->grid, grid, "initial state");
      phi = *cfg.init_field;
      break;
  }
  renormalize(phi, s.m0);
  return phi;
}

struct FlowOutcome {
  std::int64_t steps = 0;
  double residual = 1.0;
  double energy = 0.0;
  double min_energy = 0.0;
  double max_rise = 0.0; // largest single-step energy increase after transient
  bool monotone = true;  // no rise above 1e-12 * max(1, |E|) per step
  bool residual_converged = false;
  bool residual_stalled = false; // decay per check window fell below 2%
  bool energy_stalled = false;
  bool collapsed = false;
};

// Semi-implicit normalized gradient flow: -lap and +1 implicit in Fourier
// space, trap / nonlinearity / rotation explicit, mass renormalized each step.
// Exits when the residual target is met, the step budget runs out, or (if
// allow_stall_exit) the residual decay stagnates; near the critical mass the
// soft dilation mode decays at a rate ~ eps^4 and stagnation is where the
// Newton corrector takes over.
inline FlowOutcome run_flow(ComplexField& phi, const FrameSetup& s, const FlowConfig& cfg,
                            std::int64_t step_budget, double stop_residual,
                            bool collapse_throws, bool allow_stall_exit = false) {
  const GridSpec& g = phi.grid;
  Workspace ws(g);
  FlowOutcome out;
  const bool rotating = s.omega_eff != 0.0;
  const double dt = cfg.dt;

  std::vector<cplx> nl(g.size()), nl_hat(g.size());
  double prev_energy = 0.0;
  bool have_prev = false;
  double prev_residual = std::numeric_limits<double>::infinity();
  int slow_checks = 0;
  out.min_energy = std::numeric_limits<double>::infinity();

  for (std::int64_t step = 0; step < step_budget; ++step) {
    ws.transforms(phi, rotating, false);

    // energy of the current iterate from the same transforms
    const double scale = 1.0 / static_cast<double>(g.size());
    double kin = g.cell_area() * scale *
                 detail::pairwise_reduce<double>(0, g.size(), [&](std::size_t k) {
                   const int i = static_cast<int>(k) % g.nx;
                   const int j = static_cast<int>(k) / g.nx;
                   const double k1 = g.k1(i), k2 = g.k2(j);
                   return (k1 * k1 + k2 * k2) * std::norm(ws.hat[k]);
                 });
    double pot = g.cell_area() * detail::pairwise_reduce<double>(0, g.size(), [&](std::size_t k) {
      const double n2 = std::norm(phi.values[k]);
      double e = s.W.values[k] * n2 - 0.5 * s.g_nl * n2 * n2;
      if (rotating) {
        const int i = static_cast<int>(k) % g.nx;
        const int j = static_cast<int>(k) / g.nx;
        e -= s.omega_eff * std::imag(std::conj(phi.values[k]) * ws.rot(k, i, j));
      }
      return e;
    });
    const double e_now = kin + pot;
    out.energy = e_now;
    out.min_energy = std::min(out.min_energy, e_now);
    if (have_prev) {
      const double rise = e_now - prev_energy;
      const double scale_e = std::max(1.0, std::abs(prev_energy));
      if (rise > 1e-6 * scale_e && step > 50)
        throw ConvergenceError("flow: energy increased at step " + std::to_string(step) +
                               " (" + std::to_string(prev_energy) + " -> " +
                               std::to_string(e_now) + "); halve dt");
      if (step > 50) {
        out.max_rise = std::max(out.max_rise, rise);
        if (rise > 1e-12 * scale_e) out.monotone = false;
      }
      out.energy_stalled = std::abs(rise) < cfg.tol_energy * dt;
    }
    prev_energy = e_now;
    have_prev = true;

    // residual check every 32 steps
    if (step % 32 == 0) {
      ComplexField t = el_apply(phi, s, ws);
      const double mu = rayleigh_mu(phi, t, s.m0);
      out.residual = el_residual_norm(phi, t, mu);
      out.residual_converged = out.residual <= stop_residual;
      if (out.residual_converged) {
        out.steps = step;
        return out;
      }
      if (out.residual > 0.98 * prev_residual && out.residual < 0.1)
        ++slow_checks;
      else
        slow_checks = 0;
      prev_residual = out.residual;
      if (allow_stall_exit && slow_checks >= 3) {
        out.residual_stalled = true;
        out.steps = step;
        return out;
      }
    }

    if (width_cells(phi, s.m0) < cfg.collapse_width_cells) {
      out.collapsed = true;
      out.steps = step;
      if (collapse_throws)
        throw ConvergenceError(
            "flow: state width fell below " + std::to_string(cfg.collapse_width_cells) +
            " grid cells (collapse signature); near-critical runs belong in the "
            "rescaled frame");
      return out;
    }

    // explicit part: (1 - W) phi - i Omega_eff rot phi + g |phi|^2 phi
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t k = g.index(i, j);
        cplx v = (1.0 - s.W.values[k]) * phi.values[k] +
                 s.g_nl * std::norm(phi.values[k]) * phi.values[k];
        if (rotating) v -= cplx(0.0, s.omega_eff) * ws.rot(k, i, j);
        nl[k] = v;
      }
    Fft2::get(g).forward(nl.data(), nl_hat.data());
    const double inv_n = 1.0 / static_cast<double>(g.size());
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t k = g.index(i, j);
        const double k1 = g.k1(i), k2 = g.k2(j);
        nl_hat[k] = (ws.hat[k] + dt * nl_hat[k]) * inv_n / (1.0 + dt * (k1 * k1 + k2 * k2 + 1.0));
      }
    Fft2::get(g).backward(nl_hat.data(), phi.values.data());
    renormalize(phi, s.m0);
    out.steps = step + 1;
  }

  ws.transforms(phi, rotating);
  ComplexField t = el_apply(phi, s, ws);
  const double mu = rayleigh_mu(phi, t, s.m0);
  out.residual = el_residual_norm(phi, t, mu);
  out.residual_converged = out.residual <= stop_residual;
  return out;
}

// Bordered Newton-Krylov corrector for the EL system with the mass constraint.
// Unknowns (phi, mu); the bordered Jacobian is real-symmetric, solved by
// MINRES with the (k^2+1)^{-1/2} split preconditioner on the field block.
inline int newton_polish(ComplexField& phi, double& mu, const FrameSetup& s,
                         const FlowConfig& cfg) {
  const GridSpec& g = phi.grid;
  const std::size_t n = g.size();
  const std::size_t dim = 2 * n + 1;
  Workspace ws(g);

  auto pack = [&](const ComplexField& f, double last, std::vector<double>& v) {
    v.resize(dim);
    for (std::size_t k = 0; k < n; ++k) {
      v[2 * k] = f.values[k].real();
      v[2 * k + 1] = f.values[k].imag();
    }
    v[2 * n] = last;
  };
  auto unpack_field = [&](const std::vector<double>& v, ComplexField& f) {
    for (std::size_t k = 0; k < n; ++k) f.values[k] = cplx(v[2 * k], v[2 * k + 1]);
  };

  auto half_symbol = [&](std::vector<double>& v) {
    ComplexField z(g);
    unpack_field(v, z);
    Spectrum sp(z);
    ComplexField hz = sp.inverse([&](int i, int j) {
      const double k1 = g.k1(i), k2 = g.k2(j);
      return 1.0 / std::sqrt(k1 * k1 + k2 * k2 + 1.0);
    });
    for (std::size_t k = 0; k < n; ++k) {
      v[2 * k] = hz.values[k].real();
      v[2 * k + 1] = hz.values[k].imag();
    }
  };

  auto residual_vec = [&](const ComplexField& f, double mu_c, std::vector<double>& out,
                          double& norm_field) {
    ComplexField t = el_apply(f, s, ws);
    ComplexField r(g);
    for (std::size_t k = 0; k < n; ++k) r.values[k] = t.values[k] - mu_c * f.values[k];
    norm_field = l2_norm(r) / l2_norm(f);
    const double cdef = (integrate_abs2(f) - s.m0) / (2.0 * g.cell_area());
    pack(r, cdef, out);
    for (auto& v : out) v = -v;
  };

  int newton_steps = 0;
  std::vector<double> rhs, sol;
  ComplexField jf(g), delta(g);

  for (int it = 0; it < cfg.max_newton_steps; ++it) {
    double res_norm;
    residual_vec(phi, mu, rhs, res_norm);
    if (res_norm <= cfg.tol_residual) break;
    ++newton_steps;

    // Jacobian-vector product around (phi, mu)
    LinearMap apply = [&](const std::vector<double>& in, std::vector<double>& out) {
      std::vector<double> v = in;
      half_symbol(v);
      unpack_field(v, jf);
      const double dmu = v[2 * n];
      ws.transforms(jf, s.omega_eff != 0.0);
      ComplexField hj(g);
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          const std::size_t k = g.index(i, j);
          const cplx pv = phi.values[k];
          cplx v2 = -ws.lap[k] + (s.W.values[k] - mu) * jf.values[k] -
                    s.g_nl * (2.0 * std::norm(pv) * jf.values[k] + pv * pv * std::conj(jf.values[k]));
          if (s.omega_eff != 0.0) v2 += cplx(0.0, s.omega_eff) * ws.rot(k, i, j);
          v2 -= dmu * pv;
          hj.values[k] = v2;
        }
      const double crow = -detail::pairwise_reduce<double>(0, n, [&](std::size_t k) {
        return phi.values[k].real() * jf.values[k].real() +
               phi.values[k].imag() * jf.values[k].imag();
      });
      pack(hj, crow, out);
      // restore symmetry of the border: field row got -dmu*phi, so the
      // constraint row is -<phi, .>
      half_symbol(out);
      out[2 * n] = crow;
    };

    // border scaling: constraint residual must match the -<phi, .> row
    rhs[2 * n] = rhs[2 * n] * -1.0;
    std::vector<double> pre_rhs = rhs;
    half_symbol(pre_rhs);
    pre_rhs[2 * n] = rhs[2 * n];

    const double forcing = std::clamp(res_norm, 1e-4, 1e-2);
    auto stats = minres(apply, pre_rhs, sol, forcing, 600);
    (void)stats;
    half_symbol(sol);
    unpack_field(sol, delta);
    const double dmu = sol[2 * n];

    // damped update
    double step_len = 1.0;
    ComplexField trial(g);
    for (int half = 0; half < 5; ++half) {
      for (std::size_t k = 0; k < n; ++k)
        trial.values[k] = phi.values[k] + step_len * delta.values[k];
      double trial_mu = mu + step_len * dmu;
      renormalize(trial, s.m0);
      std::vector<double> tmp;
      double trial_res;
      residual_vec(trial, trial_mu, tmp, trial_res);
      if (trial_res < res_norm || half == 4) {
        phi = trial;
        mu = trial_mu;
        break;
      }
      step_len *= 0.5;
    }
  }
  return newton_steps;
}

} // namespace flow_detail

/// Ground-state minimization by normalized gradient flow with an optional
/// Newton-Krylov polish. In the rescaled frame the blown-up equation is
/// solved directly with mass a*, which keeps near-critical profiles O(1) on
/// the grid.
inline MinimizerResult minimize(const GPParams& p, const GridSpec& grid,
                                const FlowConfig& cfg, const KwongProfile& kp) {
  using namespace flow_detail;
  if (!(cfg.dt > 0.0) || !(cfg.tol_energy > 0.0) || !(cfg.tol_residual > 0.0))
    throw ValidationError("flow config: dt and tolerances must be positive");

  FrameSetup s = FrameSetup::make(p, grid, kp, cfg.frame);
  ComplexField phi = initial_state(s, grid, kp, cfg);

  Workspace ws(grid);
  FlowOutcome flow;
  std::int64_t total_steps = 0;
  int newton_steps = 0;
  double mu_hat = 0.0;
  double res = 1.0;

  const double flow_target = cfg.polish ? std::max(cfg.handoff_residual, cfg.tol_residual)
                                        : cfg.tol_residual;
  const int rounds = cfg.polish ? 3 : 1;
  for (int round = 0; round < rounds; ++round) {
    auto fo = run_flow(phi, s, cfg, cfg.max_steps - total_steps, flow_target, true,
                       cfg.polish);
    total_steps += fo.steps;
    if (round == 0) flow = fo;
    flow.max_rise = std::max(flow.max_rise, fo.max_rise);
    flow.monotone = flow.monotone && fo.monotone;
    flow.min_energy = std::min(flow.min_energy, fo.min_energy);

    ComplexField t = el_apply(phi, s, ws);
    mu_hat = rayleigh_mu(phi, t, s.m0);
    if (cfg.polish) newton_steps += newton_polish(phi, mu_hat, s, cfg);

    t = el_apply(phi, s, ws);
    mu_hat = rayleigh_mu(phi, t, s.m0);
    res = el_residual_norm(phi, t, mu_hat);
    if (res <= cfg.tol_residual) break;
  }
  flow.steps = total_steps;

  if (res > cfg.tol_residual)
    throw ConvergenceError("minimize: residual " + std::to_string(res) +
                           " above tolerance after " + std::to_string(total_steps) +
                           " flow steps and " + std::to_string(newton_steps) +
                           " Newton steps");

  MinimizerResult out;
  out.frame = cfg.frame;
  out.params = p;
  out.eps = s.eps;
  out.steps = flow.steps;
  out.newton_steps = newton_steps;
  out.final_residual = res;
  out.mass = integrate_abs2(phi);
  out.min_flow_energy = std::isfinite(flow.min_energy) ? flow.min_energy : flow.energy;
  out.energy_monotone = flow.monotone;
  out.max_energy_rise = flow.max_rise;
  out.width_cells = width_cells(phi, s.m0);
  out.rms_width = rms_width(phi);

  auto et = energy_terms(phi, s, ws);
  out.energy_frame = et.total(s.g_nl, s.omega_eff);
  if (cfg.frame == Frame::Physical) {
    out.energy = out.energy_frame;
    out.mu = out.energy - 0.5 * p.a * et.quartic; // the multiplier relation
    out.mu_hat = mu_hat;
  } else {
    const double e2 = s.eps * s.eps;
    out.energy = out.energy_frame / (e2 * s.a_star);
    const double quartic_phys = 0.5 * p.a * et.quartic / (e2 * s.a_star * s.a_star);
    out.mu = out.energy - quartic_phys;
    out.mu_hat = out.mu * e2;
  }
  out.field = std::move(phi);
  return out;
}

/// Bounded-step diagnostic for a >= a*: reports the nonexistence signature
/// (monotone energy descent without residual convergence, shrinking width)
/// without ever claiming convergence. Also runs in the existence regime as a
/// control, where it reports convergence instead.
struct CollapseReport {
  std::int64_t steps = 0;
  double energy_first = 0.0;
  double energy_last = 0.0;
  bool energy_descending_tail = false; // strictly decreasing over the final 1000 steps
  double width_initial = 0.0;
  double width_final = 0.0;
  double width_ratio = 0.0;
  double final_residual = 0.0;
  bool residual_converged = false;
  bool collapsed = false;
  std::string signature; // "collapse" | "converged" | "undecided"
};

inline CollapseReport collapse_probe(const GPParams& p, const GridSpec& grid,
                                     const FlowConfig& cfg, const KwongProfile& kp) {
  using namespace flow_detail;
  FrameSetup s = FrameSetup::make(p, grid, kp, Frame::Physical, false);
  FlowConfig probe_cfg = cfg;
  probe_cfg.frame = Frame::Physical;
  ComplexField phi = initial_state(s, grid, kp, probe_cfg);

  const GridSpec& g = grid;
  Workspace ws(g);
  CollapseReport rep;
  rep.width_initial = width_cells(phi, s.m0);

  std::vector<double> energy_tail;
  energy_tail.reserve(1001);
  bool first = true;

  std::vector<cplx> nl(g.size()), nl_hat(g.size());
  const bool rotating = s.omega_eff != 0.0;
  for (std::int64_t step = 0; step < cfg.max_steps; ++step) {
    ws.transforms(phi, rotating, false);
    const double scale = 1.0 / static_cast<double>(g.size());
    double kin = g.cell_area() * scale *
                 detail::pairwise_reduce<double>(0, g.size(), [&](std::size_t k) {
                   const int i = static_cast<int>(k) % g.nx;
                   const int j = static_cast<int>(k) / g.nx;
                   const double k1 = g.k1(i), k2 = g.k2(j);
                   return (k1 * k1 + k2 * k2) * std::norm(ws.hat[k]);
                 });
    double pot = g.cell_area() * detail::pairwise_reduce<double>(0, g.size(), [&](std::size_t k) {
      const double n2 = std::norm(phi.values[k]);
      double e = s.W.values[k] * n2 - 0.5 * s.g_nl * n2 * n2;
      if (rotating) {
        const int i = static_cast<int>(k) % g.nx;
        const int j = static_cast<int>(k) / g.nx;
        e -= s.omega_eff * std::imag(std::conj(phi.values[k]) * ws.rot(k, i, j));
      }
      return e;
    });
    const double e_now = kin + pot;
    if (first) {
      rep.energy_first = e_now;
      first = false;
    }
    rep.energy_last = e_now;
    energy_tail.push_back(e_now);
    if (energy_tail.size() > 1001) energy_tail.erase(energy_tail.begin());

    if (step % 64 == 0) {
      ComplexField t = el_apply(phi, s, ws);
      const double mu = rayleigh_mu(phi, t, s.m0);
      rep.final_residual = el_residual_norm(phi, t, mu);
      if (rep.final_residual <= cfg.tol_residual) {
        rep.residual_converged = true;
        rep.steps = step;
        break;
      }
    }
    const double wc = width_cells(phi, s.m0);
    if (wc < probe_cfg.collapse_width_cells * 0.5) {
      rep.collapsed = true;
      rep.steps = step;
      break;
    }

    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t k = g.index(i, j);
        cplx v = (1.0 - s.W.values[k]) * phi.values[k] +
                 s.g_nl * std::norm(phi.values[k]) * phi.values[k];
        if (rotating) v -= cplx(0.0, s.omega_eff) * ws.rot(k, i, j);
        nl[k] = v;
      }
    Fft2::get(g).forward(nl.data(), nl_hat.data());
    const double inv_n = 1.0 / static_cast<double>(g.size());
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t k = g.index(i, j);
        const double k1 = g.k1(i), k2 = g.k2(j);
        nl_hat[k] = (ws.hat[k] + cfg.dt * nl_hat[k]) * inv_n /
                    (1.0 + cfg.dt * (k1 * k1 + k2 * k2 + 1.0));
      }
    Fft2::get(g).backward(nl_hat.data(), phi.values.data());
    renormalize(phi, s.m0);
    rep.steps = step + 1;
  }

  rep.width_final = width_cells(phi, s.m0);
  rep.width_ratio = rep.width_final / rep.width_initial;
  rep.energy_descending_tail = energy_tail.size() >= 2;
  for (std::size_t k = 1; k < energy_tail.size(); ++k)
    if (energy_tail[k] > energy_tail[k - 1] + 1e-12 * std::max(1.0, std::abs(energy_tail[k - 1])))
      rep.energy_descending_tail = false;

  if (rep.residual_converged)
    rep.signature = "converged";
  else if ((rep.collapsed || rep.width_ratio < 0.5) && rep.energy_descending_tail)
    rep.signature = "collapse";
  else
    rep.signature = "undecided";
  return rep;
}

} // namespace gpv
