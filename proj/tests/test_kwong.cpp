// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_util.hpp"

using namespace gpv;

TEST_CASE("radial shooting matches the frozen oracle") {
  auto fix = gpvtest::load_fixture("kwong_oracle.json");
  auto prof = solve_kwong_radial(1e-12);
  CHECK(std::abs(prof.w0 - fix["w0"].get<double>()) < 1e-7);
  CHECK(prof.a_star == Catch::Approx(fix["a_star"].get<double>()).epsilon(1e-6));
}

TEST_CASE("radial profile shape") {
  auto prof = solve_kwong_radial(1e-12);

  SECTION("positive, decreasing, zero slope at the origin") {
    CHECK(prof.dw_of_r.front() == 0.0);
    for (std::size_t k = 0; k < prof.r.size(); ++k) {
      CHECK(prof.w_of_r[k] > 0.0);
      if (k > 0) CHECK(prof.w_of_r[k] < prof.w_of_r[k - 1]);
    }
  }

  SECTION("tail follows the r^{-1/2} e^{-r} decay law") {
    double lo = 1e300, hi = 0.0;
    for (double r = 10.0; r <= 20.0; r += 0.5) {
      const double ratio = prof.eval(r) * std::sqrt(r) * std::exp(r);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    CHECK(hi / lo < 1.05); // slowly varying
    CHECK(hi < 10.0);      // bounded
  }

  SECTION("tolerance refinement is stable") {
    auto prof2 = solve_kwong_radial(1e-13);
    CHECK(std::abs(prof.w0 - prof2.w0) < 1e-9);
    CHECK(std::abs(prof.a_star - prof2.a_star) / prof.a_star < 1e-8);
  }

  SECTION("tolerance domain is validated") {
    CHECK_THROWS_AS(solve_kwong_radial(1e-15), ValidationError);
    CHECK_THROWS_AS(solve_kwong_radial(1e-3), ValidationError);
  }
}

TEST_CASE("rasterization onto the grid") {
  const auto& kp = gpvtest::kwong(256, 16.0);

  SECTION("2d critical mass agrees with the radial oracle") {
    CHECK(kp.a_star_2d == Catch::Approx(kp.a_star_radial).epsilon(1e-6));
  }

  SECTION("even in x1 and x2 sample-exactly") {
    const GridSpec& g = kp.w.grid;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        REQUIRE(kp.w.at(i, j) == kp.w.at((g.nx - i) % g.nx, j));
        REQUIRE(kp.w.at(i, j) == kp.w.at(i, (g.ny - j) % g.ny));
      }
  }

  SECTION("discrete PDE residual after polish") {
    CHECK(kp.pde_residual < 1e-8);
    RealField res = laplacian(kp.w);
    for (std::size_t k = 0; k < kp.w.size(); ++k) {
      const double v = kp.w.values[k];
      res.values[k] -= v - v * v * v; // lap w = w - w^3
    }
    CHECK(sup_norm(res) / sup_norm(kp.w) < 1e-8);
  }

  SECTION("kernel property of the L operator") {
    RealField lw = laplacian(kp.w);
    for (std::size_t k = 0; k < kp.w.size(); ++k) {
      const double v = kp.w.values[k];
      lw.values[k] = -lw.values[k] + v - v * v * v;
    }
    CHECK(sup_norm(lw) / sup_norm(kp.w) < 1e-8);
  }

  SECTION("grid exceeding the radial extent is rejected") {
    auto prof = solve_kwong_radial(1e-10);
    CHECK_THROWS_AS(rasterize(prof, GridSpec(64, 20.0)), ValidationError);
  }
}

TEST_CASE("variational identities of the profile") {
  const auto& kp = gpvtest::kwong(256, 16.0);
  auto id = verify_identities(kp);
  CHECK(id.grad_sq == Catch::Approx(id.mass).epsilon(1e-7));
  CHECK(id.quartic_half == Catch::Approx(id.mass).epsilon(1e-7));
  CHECK(id.gn_ratio == Catch::Approx(1.0).epsilon(1e-7));

  // strict inequality for a non-optimizer
  auto gauss = make_real_field(kp.w.grid,
                               [](double x, double y) { return std::exp(-0.4 * (x * x + y * y)); });
  CHECK(gn_ratio(gauss, kp.a_star_2d) < 1.0);
}

TEST_CASE("critical mass converges under grid refinement") {
  auto prof = solve_kwong_radial(1e-12);
  double a64 = rasterize(prof, GridSpec(64, 12.0)).a_star_2d;
  double a128 = rasterize(prof, GridSpec(128, 12.0)).a_star_2d;
  double a256 = rasterize(prof, GridSpec(256, 12.0)).a_star_2d;
  const double d1 = std::abs(a64 - a128);
  const double d2 = std::abs(a128 - a256);
  // at least 4x reduction per doubling until the oracle floor
  CHECK((d2 < d1 / 4.0 || d2 < 1e-9));
}
