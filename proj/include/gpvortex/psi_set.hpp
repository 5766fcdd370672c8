// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <map>
#include <string>

#include "gpvortex/linops.hpp"

namespace gpv {

struct SolveDiagnostics {
  double residual = 0.0;
  double solvability_defect = 0.0;
  int iterations = 0;
  std::array<double, 2> gauge_coeffs{0.0, 0.0};
};

/// The auxiliary fields of the near-critical expansion at anisotropy Lambda.
///
/// psi2 has the closed form -(w + x.grad w)/2 in the continuum; on the grid it
/// is solved like the others so the discrete operator identity holds to solver
/// tolerance, and the closed form stays available as a cross-check. psi1
/// splits into a radial part plus the anisotropic corrector psi_aniso, and
/// psiI solves the L-equation sourced by the angular derivative of psi_aniso.
/// psi3 keeps its rotation part separate so one solve serves every rotation
/// speed: the angular source enters the expansion once through psiI and once
/// through the coupling term, so it recombines as psi3_base + Omega^2 psi3_rot.
struct PsiSet {
  double Lambda = 0.0;
  double lambda0 = 0.0; // (int V w^2)^{1/4}
  RealField psi1;
  RealField psi2;
  RealField psi_aniso;
  RealField psiI;
  RealField psi3_base;
  RealField psi3_rot;
  RealField psi4;
  RealField psi5;
  std::map<std::string, SolveDiagnostics> diagnostics;

  RealField psi3_at(double Omega) const {
    RealField out = psi3_base;
    const double s = Omega * Omega;
    for (std::size_t k = 0; k < out.size(); ++k) out.values[k] += s * psi3_rot.values[k];
    return out;
  }
};

namespace psi_detail {

inline RealField trap_field(const GridSpec& g, double Lambda) {
  return make_real_field(g, [Lambda](double x, double y) {
    return x * x + Lambda * Lambda * y * y;
  });
}

inline SolveDiagnostics record(const DeflatedSolve& s) {
  return SolveDiagnostics{s.residual, s.solvability_defect, s.iterations, s.gauge_coeffs};
}

} // namespace psi_detail

/// -(w + x.grad w)/2, the continuum solution of Ltilde psi2 = w.
inline RealField closed_form_psi2(const KwongProfile& kp) {
  RealField xgw = scaling_derivative(kp.w);
  RealField out(kp.w.grid);
  for (std::size_t k = 0; k < out.size(); ++k)
    out.values[k] = -0.5 * (kp.w.values[k] + xgw.values[k]);
  return out;
}

inline PsiSet build_psi_set(double Lambda, const KwongProfile& kp, double tol = 1e-11) {
  if (!(Lambda > 0.0 && Lambda <= 1.0))
    throw ValidationError("build_psi_set: Lambda must lie in (0, 1]; larger anisotropy "
                          "is the same problem with the axes swapped");
  const GridSpec& g = kp.w.grid;
  const RealField& w = kp.w;
  const double a_star = kp.a_star_2d;

  PsiSet ps;
  ps.Lambda = Lambda;
  const double lam4 = trap_quadratic_moment(kp, Lambda);
  ps.lambda0 = std::pow(lam4, 0.25);

  const RealField V = psi_detail::trap_field(g, Lambda);
  RealField w3(g);
  for (std::size_t k = 0; k < g.size(); ++k) w3.values[k] = std::pow(w.values[k], 3);

  // psi1:  Ltilde psi1 = -(lambda0^4/a*) w^3 - V w,  grad psi1(0) = 0
  RealField rhs1(g);
  for (std::size_t k = 0; k < g.size(); ++k)
    rhs1.values[k] = -(lam4 / a_star) * w3.values[k] - V.values[k] * w.values[k];
  auto s1 = solve_deflated(WhichOp::Ltilde, kp, rhs1, Gauge::GradZeroAtOrigin, tol);
  ps.psi1 = s1.solution;
  ps.diagnostics["psi1"] = psi_detail::record(s1);

  // psi_aniso:  Ltilde psi = -(1 - Lambda^2) x1^2 w
  RealField rhs_a(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x1(i);
      rhs_a.at(i, j) = -(1.0 - Lambda * Lambda) * x * x * w.at(i, j);
    }
  auto sa = solve_deflated(WhichOp::Ltilde, kp, rhs_a, Gauge::GradZeroAtOrigin, tol);
  ps.psi_aniso = sa.solution;
  ps.diagnostics["psi_aniso"] = psi_detail::record(sa);

  // psi2:  Ltilde psi2 = w,  grad psi2(0) = 0
  auto s2 = solve_deflated(WhichOp::Ltilde, kp, w, Gauge::GradZeroAtOrigin, tol);
  ps.psi2 = s2.solution;
  ps.diagnostics["psi2"] = psi_detail::record(s2);

  // psiI:  L psiI = -(x-perp . grad psi_aniso),  int w psiI = 0.
  // psi1 and psi_aniso differ by a radial field, so either one sources the
  // same angular derivative.
  RealField rhsI = angular_derivative(ps.psi_aniso);
  for (auto& v : rhsI.values) v = -v;
  auto sI = solve_deflated(WhichOp::L, kp, rhsI, Gauge::L2OrthogonalToW, tol);
  ps.psiI = sI.solution;
  ps.diagnostics["psiI"] = psi_detail::record(sI);

  // psi3 without rotation:  3 w psi1^2 - (3 lambda0^4/a* w^2 + V) psi1
  RealField rhs3(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double wv = w.values[k], p1 = ps.psi1.values[k];
    rhs3.values[k] = 3.0 * wv * p1 * p1 -
                     (3.0 * lam4 / a_star * wv * wv + V.values[k]) * p1;
  }
  auto s3 = solve_deflated(WhichOp::Ltilde, kp, rhs3, Gauge::GradZeroAtOrigin, tol);
  ps.psi3_base = s3.solution;
  ps.diagnostics["psi3_base"] = psi_detail::record(s3);

  // rotation part of psi3, sourced by x-perp . grad psiI
  RealField rhs3r = angular_derivative(ps.psiI);
  auto s3r = solve_deflated(WhichOp::Ltilde, kp, rhs3r, Gauge::GradZeroAtOrigin, tol);
  ps.psi3_rot = s3r.solution;
  ps.diagnostics["psi3_rot"] = psi_detail::record(s3r);

  // psi4:  psi2 + 3 w psi2^2
  RealField rhs4(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double p2 = ps.psi2.values[k];
    rhs4.values[k] = p2 + 3.0 * w.values[k] * p2 * p2;
  }
  auto s4 = solve_deflated(WhichOp::Ltilde, kp, rhs4, Gauge::GradZeroAtOrigin, tol);
  ps.psi4 = s4.solution;
  ps.diagnostics["psi4"] = psi_detail::record(s4);

  // psi5:  6 w psi1 psi2 + psi1 - (3 lambda0^4/a* w^2 + V) psi2
  RealField rhs5(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double wv = w.values[k], p1 = ps.psi1.values[k], p2 = ps.psi2.values[k];
    rhs5.values[k] = 6.0 * wv * p1 * p2 + p1 -
                     (3.0 * lam4 / a_star * wv * wv + V.values[k]) * p2;
  }
  auto s5 = solve_deflated(WhichOp::Ltilde, kp, rhs5, Gauge::GradZeroAtOrigin, tol);
  ps.psi5 = s5.solution;
  ps.diagnostics["psi5"] = psi_detail::record(s5);

  return ps;
}

} // namespace gpv
