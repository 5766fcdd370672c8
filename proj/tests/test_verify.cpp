// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "test_util.hpp"

using namespace gpv;

namespace {

// shared small-grid stack for the minimizer-based tests
struct Stack {
  const KwongProfile& kp = gpvtest::kwong(128, 12.0);
  PsiSet ps = build_psi_set(0.8, kp);
};

Stack& stack() {
  static Stack s;
  return s;
}

MinimizerResult solve_near_critical(double da, double omega) {
  auto& s = stack();
  GPParams p{s.kp.a_star_2d - da, 0.8, omega};
  FlowConfig cfg;
  cfg.frame = Frame::Rescaled;
  cfg.init = InitKind::KwongSeeded;
  cfg.dt = 2e-3;
  cfg.tol_residual = 1e-11;
  return minimize(p, s.kp.w.grid, cfg, s.kp);
}

} // namespace

TEST_CASE("gauge fit of trivial inputs") {
  const auto& kp = gpvtest::kwong(128, 12.0);
  GPParams p{kp.a_star_2d - 1e-2, 0.8, 0.8};

  SECTION("input equal to w") {
    auto fit = fit_gauge(to_complex(kp.w), p, kp, Frame::Rescaled);
    CHECK(fit.xa_norm() < 1e-12);
    CHECK(fit.theta_a < 1e-12);
    double d = 0.0;
    for (std::size_t k = 0; k < kp.w.size(); ++k)
      d = std::max(d, std::abs(fit.v.values[k] - kp.w.values[k]));
    CHECK(d < 1e-12);
  }

  SECTION("pure phase is recovered") {
    const double theta = std::numbers::pi / 3.0;
    ComplexField u(kp.w.grid);
    const cplx ph = std::exp(cplx(0.0, theta));
    for (std::size_t k = 0; k < u.size(); ++k) u.values[k] = ph * kp.w.values[k];
    auto fit = fit_gauge(u, p, kp, Frame::Rescaled);
    // v = e^{i theta_a} u must equal w, so theta_a = 2 pi - theta
    CHECK(fit.theta_a == Catch::Approx(2.0 * std::numbers::pi - theta).epsilon(1e-12));
    double d = 0.0;
    for (std::size_t k = 0; k < kp.w.size(); ++k)
      d = std::max(d, std::abs(fit.v.values[k] - kp.w.values[k]));
    CHECK(d < 1e-12);
    CHECK(fit.orth_defect < 1e-9);
  }

  SECTION("degenerate double maximum is reported") {
    auto two_bumps = make_complex_field(kp.w.grid, [](double x, double y) {
      const double dxm = x - 3.0, dxp = x + 3.0;
      return cplx(std::exp(-(dxm * dxm + y * y)) + std::exp(-(dxp * dxp + y * y)), 0.0);
    });
    CHECK_THROWS_AS(fit_gauge(two_bumps, p, kp, Frame::Rescaled), ConvergenceError);
  }
}

TEST_CASE("vortex scan") {
  GridSpec g(128, 12.0);

  SECTION("positive real field has no vortices") {
    const auto& kp = gpvtest::kwong(128, 12.0);
    auto scan = vortex_scan(to_complex(kp.w));
    CHECK(scan.vortices.empty());
    CHECK(scan.vortex_free_radius == Catch::Approx(std::min(g.Lx - g.hx(), g.Ly - g.hy())));
  }

  SECTION("canonical single vortex") {
    auto f = make_complex_field(g, [](double x, double y) {
      return cplx(x, y) * std::exp(-(x * x + y * y));
    });
    auto scan = vortex_scan(f);
    REQUIRE(scan.vortices.size() == 1);
    CHECK(scan.vortices[0].winding == 1);
    CHECK(std::hypot(scan.vortices[0].x, scan.vortices[0].y) < g.hx());
    CHECK(scan.vortex_free_radius < 1.0);
  }

  SECTION("winding additivity on a multi-vortex field") {
    auto f = make_complex_field(g, [](double x, double y) {
      const cplx z(x, y);
      const cplx z1(1.5, 0.5), z2(-2.0, 1.0), z3(0.5, -2.5);
      return (z - z1) * (z - z2) * (z - z3) * std::exp(-0.3 * std::norm(z));
    });
    auto scan = vortex_scan(f);
    CHECK(scan.total_winding == 3);
    CHECK(scan.total_winding == boundary_loop_winding(f));
    CHECK(scan.vortices.size() == 3);
  }

  SECTION("conjugate vortex has negative winding") {
    auto f = make_complex_field(g, [](double x, double y) {
      return cplx(x, -y) * std::exp(-(x * x + y * y));
    });
    auto scan = vortex_scan(f);
    REQUIRE(scan.vortices.size() == 1);
    CHECK(scan.vortices[0].winding == -1);
  }

  SECTION("magnitude floor excludes the far tail") {
    auto f = make_complex_field(g, [](double x, double y) {
      return cplx(x, y) * std::exp(-(x * x + y * y));
    });
    auto scan = vortex_scan(f, 1e-12);
    CHECK(scan.skipped_plaquettes > 0);
  }
}

TEST_CASE("near-critical minimizer: gauge fit and expansion") {
  auto& s = stack();
  auto res = solve_near_critical(1e-2, 0.8);
  GPParams p = res.params;
  auto fit = fit_gauge(res.field, p, s.kp, Frame::Rescaled);

  SECTION("orthogonality and centering") {
    CHECK(fit.orth_defect < 1e-9);
    CHECK(fit.max_offset_cells < 1.0);
    CHECK(fit.xa_norm() < 1e-3 * s.kp.w.grid.hx());
  }

  SECTION("phase gauge is a strict local minimum of the distance to w") {
    const double base = l2_norm(fit.v - to_complex(s.kp.w));
    for (double dth : {-1e-3, 1e-3}) {
      ComplexField vv = fit.v;
      const cplx ph = std::exp(cplx(0.0, dth));
      for (auto& z : vv.values) z *= ph;
      CHECK(l2_norm(vv - to_complex(s.kp.w)) > base);
    }
  }

  SECTION("expansion residuals at first and second order") {
    const double c_ref = c_star(0.8, s.kp, s.ps);
    auto rep = decompose_and_compare(fit, s.ps, s.kp, res.mu_hat, p.Omega, c_ref);
    CHECK(rep.beta_ratio == Catch::Approx(c_ref).epsilon(0.05));
    CHECK(rep.R_residual < 0.1);
    CHECK(rep.I_residual < 0.1);
    CHECK(rep.second_order_residual < 1.0);
    // the fitted (w + x.grad w) coefficient follows the beta-law convention
    CHECK(rep.minus_two_c_fit_over_eps4 == Catch::Approx(rep.beta_ratio).epsilon(1e-2));
    CHECK(rep.vortices.empty());
    CHECK(rep.decay_bounded);
  }

  SECTION("rotation recombination of psi3 uses the squared speed") {
    // solve at a second rotation speed and compare second-order residuals
    // under the quadratic and linear recombination rules
    auto res2 = solve_near_critical(1e-2, 1.44);
    auto fit2 = fit_gauge(res2.field, res2.params, s.kp, Frame::Rescaled);
    const double c_ref = c_star(0.8, s.kp, s.ps);
    auto rep2 = decompose_and_compare(fit2, s.ps, s.kp, res2.mu_hat, 1.44, c_ref);

    // linear-recombination alternative, evaluated by hand
    const double eps4 = std::pow(fit2.eps_a, 4);
    const double beta = 1.0 + res2.mu_hat;
    RealField R = real_part(fit2.v);
    R -= s.kp.w;
    double sup_linear = 0.0;
    const GridSpec& g = s.kp.w.grid;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double psi3_lin = s.ps.psi3_base.values[k] + 1.44 * s.ps.psi3_rot.values[k];
      const double second = R.values[k] - eps4 * s.ps.psi1.values[k] -
                            beta * s.ps.psi2.values[k] - eps4 * eps4 * psi3_lin -
                            beta * beta * s.ps.psi4.values[k] -
                            eps4 * beta * s.ps.psi5.values[k];
      sup_linear = std::max(sup_linear, std::abs(second));
    }
    const double lin_resid = sup_linear / std::pow(eps4 + std::abs(beta), 2);
    CHECK(rep2.second_order_residual <= lin_resid * 1.000001);
  }
}

TEST_CASE("xa tracks an artificially shifted trap") {
  const auto& kp = gpvtest::kwong(128, 12.0);
  GPParams p{kp.a_star_2d - 0.5, 0.8, 0.0};
  p.trap_x1 = 0.4;
  p.trap_x2 = -0.25;
  FlowConfig cfg;
  cfg.frame = Frame::Physical;
  cfg.init = InitKind::Gaussian;
  cfg.dt = 2e-3;
  cfg.tol_residual = 1e-10;
  auto res = minimize(p, kp.w.grid, cfg, kp);
  auto fit = fit_gauge(res.field, p, kp, Frame::Physical);
  CHECK(fit.x_a1 == Catch::Approx(0.4).margin(2 * kp.w.grid.hx()));
  CHECK(fit.x_a2 == Catch::Approx(-0.25).margin(2 * kp.w.grid.hy()));
}

TEST_CASE("decay envelope of the trivial deviation") {
  const auto& kp = gpvtest::kwong(128, 12.0);
  GPParams p{kp.a_star_2d - 1e-2, 0.8, 0.0};
  auto fit = fit_gauge(to_complex(kp.w), p, kp, Frame::Rescaled);
  auto [c1, ok] = decay_envelope_check(fit, kp, 3.95);
  CHECK(ok);
  CHECK(c1 < 1e-9);
}

TEST_CASE("sweep rows carry the verification columns") {
  auto& s = stack();
  FlowConfig cfg;
  cfg.frame = Frame::Rescaled;
  cfg.init = InitKind::KwongSeeded;
  cfg.dt = 2e-3;
  cfg.tol_residual = 1e-10;
  GPParams base{0.0, 0.8, 0.8};
  auto rows = run_sweep({s.kp.a_star_2d - 3e-2, s.kp.a_star_2d - 1e-2}, base, s.kp.w.grid,
                        cfg, s.kp, s.ps, true);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].eps < rows[0].eps);
  CHECK(rows[1].R_resid1 <= rows[0].R_resid1 * 1.1);
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.beta_over_eps4));
    CHECK(r.orth_defect < 1e-9);
    CHECK(r.final_residual < 1e-10);
    CHECK(r.vortex_free_radius > 0.0);
  }
}

TEST_CASE("loglog slope helper") {
  std::vector<double> x{1.0, 0.5, 0.25, 0.125};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  CHECK(loglog_slope(x, y) == Catch::Approx(2.0).epsilon(1e-12));
}
