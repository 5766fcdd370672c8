// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "gpvortex/field.hpp"

namespace gpv {

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

using LinearMap = std::function<void(const std::vector<double>&, std::vector<double>&)>;

namespace krylov_detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return detail::pairwise_reduce<double>(0, a.size(),
                                         [&](std::size_t k) { return a[k] * b[k]; });
}
inline double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }
inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += alpha * x[k];
}
inline void scal(double alpha, std::vector<double>& x) {
  for (auto& v : x) v *= alpha;
}

} // namespace krylov_detail

/// MINRES for symmetric (possibly indefinite or consistently singular)
/// systems. Stops when ||A x - b|| <= tol * ||b||. All reductions use the
/// deterministic pairwise tree.
inline SolveStats minres(const LinearMap& apply, const std::vector<double>& b,
                         std::vector<double>& x, double tol, int max_iter) {
  using namespace krylov_detail;
  const std::size_t n = b.size();
  x.assign(n, 0.0);

  std::vector<double> v_prev(n, 0.0), v(n), v_next(n), tmp(n);
  std::vector<double> w_prev(n, 0.0), w_curr(n, 0.0), w_next(n);

  const double beta1 = nrm2(b);
  SolveStats stats;
  if (beta1 == 0.0) {
    stats.converged = true;
    return stats;
  }
  v = b;
  scal(1.0 / beta1, v);

  double beta = beta1;
  double eta = beta1;
  double gamma1 = 1.0, gamma0 = 1.0;
  double sigma1 = 0.0, sigma0 = 0.0;
  double res_norm = beta1;

  for (int k = 1; k <= max_iter; ++k) {
    apply(v, tmp);
    const double alpha = dot(v, tmp);
    for (std::size_t i = 0; i < n; ++i) v_next[i] = tmp[i] - alpha * v[i] - beta * v_prev[i];
    const double beta_next = nrm2(v_next);

    const double delta = gamma1 * alpha - gamma0 * sigma1 * beta;
    const double rho1 = std::sqrt(delta * delta + beta_next * beta_next);
    const double rho2 = sigma1 * alpha + gamma0 * gamma1 * beta;
    const double rho3 = sigma0 * beta;
    const double gamma_next = delta / rho1;
    const double sigma_next = beta_next / rho1;

    for (std::size_t i = 0; i < n; ++i)
      w_next[i] = (v[i] - rho3 * w_prev[i] - rho2 * w_curr[i]) / rho1;
    axpy(gamma_next * eta, w_next, x);

    eta = -sigma_next * eta;
    res_norm *= std::abs(sigma_next);

    stats.iterations = k;
    stats.rel_residual = res_norm / beta1;
    if (stats.rel_residual <= tol) {
      stats.converged = true;
      break;
    }
    if (beta_next == 0.0) { // exact invariant subspace reached
      stats.converged = stats.rel_residual <= tol;
      break;
    }

    std::swap(v_prev, v);
    std::swap(v, v_next);
    scal(1.0 / beta_next, v);
    std::swap(w_prev, w_curr);
    std::swap(w_curr, w_next);
    beta = beta_next;
    gamma0 = gamma1;
    gamma1 = gamma_next;
    sigma0 = sigma1;
    sigma1 = sigma_next;
  }
  return stats;
}

} // namespace gpv
