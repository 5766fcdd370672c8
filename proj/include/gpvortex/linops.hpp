// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "gpvortex/kwong.hpp"
#include "gpvortex/minres.hpp"
#include "gpvortex/spectral.hpp"

namespace gpv {

/// L = -lap + 1 - w^2 (kernel {w});  Ltilde = -lap + 1 - 3 w^2
/// (kernel {d1 w, d2 w}).
enum class WhichOp { L, Ltilde };

inline const char* name(WhichOp op) { return op == WhichOp::L ? "L" : "Ltilde"; }

inline RealField apply_linop(WhichOp which, const KwongProfile& kp, const RealField& f) {
  require_same_grid(kp.w.grid, f.grid, "apply_linop");
  const double c = which == WhichOp::L ? 1.0 : 3.0;
  RealField out = laplacian(f);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double wv = kp.w.values[k];
    out.values[k] = -out.values[k] + (1.0 - c * wv * wv) * f.values[k];
  }
  return out;
}

/// How the free kernel component of a singular solve is pinned down.
enum class Gauge {
  GradZeroAtOrigin,  // Ltilde: add c . grad w so that grad psi(0) = 0
  L2OrthogonalToW,   // L: remove the w component
};

struct DeflatedSolve {
  WhichOp which;
  Gauge gauge;
  RealField solution;
  double solvability_defect = 0.0; // norm fraction of rhs inside the cokernel
  int iterations = 0;
  double residual = 0.0; // ||Op(psi) - rhs_projected|| / ||rhs||
  std::array<double, 2> gauge_coeffs{0.0, 0.0};
};

namespace linops_detail {

inline RealField half_inverse_helmholtz(const RealField& f) {
  Spectrum s(f);
  const GridSpec& g = f.grid;
  return real_part(s.inverse([&](int i, int j) {
    const double k1 = g.k1(i), k2 = g.k2(j);
    return 1.0 / std::sqrt(k1 * k1 + k2 * k2 + 1.0);
  }));
}

// l2-orthonormal numerical kernel basis of the requested operator. The
// discretization perturbs the kernel, so the basis is computed from the
// rasterized profile rather than assumed exact.
inline std::vector<RealField> kernel_basis(WhichOp which, const KwongProfile& kp) {
  std::vector<RealField> basis;
  if (which == WhichOp::L) {
    basis.push_back(kp.w);
  } else {
    auto [d1, d2] = gradient(kp.w);
    basis.push_back(std::move(d1));
    basis.push_back(std::move(d2));
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double c = krylov_detail::dot(basis[i].values, basis[j].values);
      for (std::size_t k = 0; k < basis[i].size(); ++k)
        basis[i].values[k] -= c * basis[j].values[k];
    }
    const double n = krylov_detail::nrm2(basis[i].values);
    basis[i] *= 1.0 / n;
  }
  return basis;
}

inline void project_out(const std::vector<RealField>& basis, std::vector<double>& v) {
  for (const auto& q : basis) {
    const double c = krylov_detail::dot(q.values, v);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] -= c * q.values[k];
  }
}

} // namespace linops_detail

/// Solve Op(psi) = rhs on the orthogonal complement of the numerical kernel,
/// then fix the free kernel component by the requested gauge. The Krylov
/// iteration runs on the symmetrically preconditioned projected operator
/// (k^2+1)^{-1/2} P Op P (k^2+1)^{-1/2}.
inline DeflatedSolve solve_deflated(WhichOp which, const KwongProfile& kp,
                                    const RealField& rhs, Gauge gauge,
                                    double tol = 1e-11, int max_iter = 5000) {
  using namespace linops_detail;
  require_same_grid(kp.w.grid, rhs.grid, "solve_deflated");
  require_finite(rhs, "solve_deflated rhs");
  const GridSpec& g = rhs.grid;

  DeflatedSolve out{which, gauge, RealField(g), 0.0, 0, 0.0, {0.0, 0.0}};

  const double rhs_norm = krylov_detail::nrm2(rhs.values);
  if (rhs_norm == 0.0) return out;

  auto basis = kernel_basis(which, kp);
  double defect2 = 0.0;
  for (const auto& q : basis) {
    const double c = krylov_detail::dot(q.values, rhs.values);
    defect2 += c * c;
  }
  out.solvability_defect = std::sqrt(defect2) / rhs_norm;
  if (out.solvability_defect > 1e-6)
    throw CokernelError("solve_deflated(" + std::string(name(which)) +
                            "): right-hand side has cokernel component, defect=" +
                            std::to_string(out.solvability_defect),
                        out.solvability_defect);

  std::vector<double> b = rhs.values;
  project_out(basis, b);
  b = half_inverse_helmholtz(RealField(g, std::move(b))).values;

  LinearMap apply = [&](const std::vector<double>& in, std::vector<double>& res) {
    RealField z = half_inverse_helmholtz(RealField(g, in));
    project_out(basis, z.values);
    RealField az = apply_linop(which, kp, z);
    project_out(basis, az.values);
    res = half_inverse_helmholtz(az).values;
  };

  std::vector<double> y;
  auto stats = minres(apply, b, y, tol, max_iter);
  out.iterations = stats.iterations;
  if (!stats.converged)
    throw ConvergenceError("solve_deflated(" + std::string(name(which)) +
                           "): MINRES stalled at relative residual " +
                           std::to_string(stats.rel_residual) + " after " +
                           std::to_string(stats.iterations) + " iterations");

  RealField x = half_inverse_helmholtz(RealField(g, y));
  project_out(basis, x.values);

  if (gauge == Gauge::GradZeroAtOrigin && which == WhichOp::Ltilde) {
    // grad(psi + c1 d1w + c2 d2w)(0) = 0; the Hessian of w at the origin is
    // invertible, so the 2x2 system determines c uniquely.
    auto [gx, gy] = gradient(x);
    auto [w1, w2] = gradient(kp.w);
    auto [h11, h12] = gradient(w1);
    auto [h21, h22] = gradient(w2);
    const std::size_t o = g.origin_index();
    const double a = h11.values[o], bb = h12.values[o];
    const double cc = h21.values[o], d = h22.values[o];
    const double det = a * d - bb * cc;
    const double r1 = -gx.values[o], r2 = -gy.values[o];
    const double c1 = (d * r1 - bb * r2) / det;
    const double c2 = (-cc * r1 + a * r2) / det;
    for (std::size_t k = 0; k < x.size(); ++k)
      x.values[k] += c1 * w1.values[k] + c2 * w2.values[k];
    out.gauge_coeffs = {c1, c2};
  } else if (gauge == Gauge::L2OrthogonalToW) {
    const double c = inner(kp.w, x) / inner(kp.w, kp.w);
    for (std::size_t k = 0; k < x.size(); ++k) x.values[k] -= c * kp.w.values[k];
    out.gauge_coeffs = {-c, 0.0};
  }

  RealField check = apply_linop(which, kp, x);
  std::vector<double> rp = rhs.values;
  project_out(basis, rp);
  for (std::size_t k = 0; k < check.size(); ++k) check.values[k] -= rp[k];
  out.residual = krylov_detail::nrm2(check.values) / rhs_norm;
  out.solution = std::move(x);
  return out;
}

} // namespace gpv
