// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "test_util.hpp"

using namespace gpv;
using gpvtest::random_smooth_field;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(GridSpec(15, 12.0), ValidationError);
  CHECK_THROWS_AS(GridSpec(33, 32, 12.0, 12.0), ValidationError);
  CHECK_THROWS_AS(GridSpec(64, -1.0), ValidationError);
  GridSpec g(64, 12.0);
  CHECK(g.x1(g.origin_i()) == 0.0);
  CHECK(g.x2(g.origin_j()) == 0.0);
  CHECK(g.hx() == Catch::Approx(2 * 12.0 / 64));
}

TEST_CASE("quadrature: gaussian integral and exact zero") {
  GridSpec g(128, 12.0);
  auto f = make_real_field(g, [](double x, double y) { return std::exp(-(x * x + y * y)); });
  CHECK(integrate(f) == Catch::Approx(std::numbers::pi).epsilon(1e-12));
  RealField z(g);
  CHECK(integrate(z) == 0.0);
}

TEST_CASE("quadrature rejects non-finite samples with the offending index") {
  GridSpec g(32, 4.0);
  RealField f(g, 1.0);
  f.values[123] = std::nan("");
  try {
    integrate(f);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(e.index == 123);
  }
}

TEST_CASE("spectral derivatives: analytic cases") {
  GridSpec g(128, 12.0);
  auto f = make_real_field(g, [](double x, double y) { return std::exp(-(x * x + y * y)); });

  SECTION("laplacian of a gaussian") {
    auto lap = laplacian(f);
    double err = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double r2 = g.x1(i) * g.x1(i) + g.x2(j) * g.x2(j);
        err = std::max(err, std::abs(lap.at(i, j) - (4 * r2 - 4) * std::exp(-r2)));
      }
    CHECK(err < 1e-10);
  }

  SECTION("gradient of a constant vanishes exactly") {
    auto c = make_real_field(g, [](double, double) { return 3.25; });
    auto [gx, gy] = gradient(c);
    CHECK(sup_norm(gx) == 0.0);
    CHECK(sup_norm(gy) == 0.0);
  }

  SECTION("angular derivative annihilates radial fields") {
    CHECK(sup_norm(angular_derivative(f)) < 1e-10);
  }

  SECTION("angular derivative of x1 x2 g(r)") {
    auto fxy = make_real_field(g, [](double x, double y) {
      return x * y * std::exp(-(x * x + y * y));
    });
    auto ang = angular_derivative(fxy);
    double err = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double x = g.x1(i), y = g.x2(j);
        const double exact = (x * x - y * y) * std::exp(-(x * x + y * y));
        err = std::max(err, std::abs(ang.at(i, j) - exact));
      }
    CHECK(err < 1e-10);
  }
}

TEST_CASE("spectral-quadrature consistency on random smooth fields") {
  GridSpec g(128, 12.0);
  for (unsigned seed : {11u, 12u, 13u, 14u, 15u}) {
    auto f = random_smooth_field(g, seed);
    auto [fx, fy] = gradient(f);
    const double grad_sq = inner(fx, fx) + inner(fy, fy);
    const double via_lap = -inner(f, laplacian(f));
    CHECK(grad_sq == Catch::Approx(via_lap).epsilon(1e-10));
  }
}

TEST_CASE("angular derivative is antisymmetric") {
  GridSpec g(128, 12.0);
  for (unsigned seed : {21u, 22u, 23u}) {
    auto f = random_smooth_field(g, seed);
    auto h = random_smooth_field(g, seed + 100);
    const double lhs = inner(f, angular_derivative(h));
    const double rhs = -inner(h, angular_derivative(f));
    const double scale = l2_norm(f) * l2_norm(h);
    CHECK(std::abs(lhs - rhs) / scale < 1e-10);
  }
}

TEST_CASE("operations are pure: identical runs are bit-identical") {
  GridSpec g(64, 8.0);
  auto f = random_smooth_field(g, 31);
  auto a1 = laplacian(f);
  auto a2 = laplacian(f);
  CHECK(a1.values == a2.values);
  auto s1 = integrate(f * f);
  auto s2 = integrate(f * f);
  CHECK(s1 == s2);
  auto g1 = angular_derivative(f);
  auto g2 = angular_derivative(f);
  CHECK(g1.values == g2.values);
}

TEST_CASE("field arithmetic requires identical grids") {
  GridSpec a(32, 4.0), b(32, 5.0);
  RealField fa(a, 1.0), fb(b, 1.0);
  CHECK_THROWS_AS(fa + fb, GridMismatchError);
  CHECK_THROWS_AS(inner(fa, fb), GridMismatchError);
}

TEST_CASE("field file round trips bit-exactly") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gpv_io_test";
  fs::create_directories(dir);
  GridSpec g(32, 4.0);

  SECTION("real") {
    auto f = random_smooth_field(g, 77);
    write_field(f, dir / "r.gpf");
    auto f2 = read_real_field(dir / "r.gpf");
    CHECK(f2.grid == g);
    CHECK(f2.values == f.values);
  }

  SECTION("complex, interleaved") {
    ComplexField f(g);
    auto re = random_smooth_field(g, 78);
    auto im = random_smooth_field(g, 79);
    for (std::size_t k = 0; k < g.size(); ++k) f.values[k] = cplx(re.values[k], im.values[k]);
    write_field(f, dir / "c.gpf");
    auto f2 = read_complex_field(dir / "c.gpf");
    CHECK(f2.values == f.values);
  }

  SECTION("bad magic") {
    std::ofstream out(dir / "bad.gpf", std::ios::binary);
    out << "XXXX0000junk";
    out.close();
    CHECK_THROWS_AS(read_real_field(dir / "bad.gpf"), FormatError);
  }

  SECTION("kind mismatch") {
    auto f = random_smooth_field(g, 80);
    write_field(f, dir / "k.gpf");
    CHECK_THROWS_AS(read_complex_field(dir / "k.gpf"), FormatError);
    ComplexField c(g);
    write_field(c, dir / "k2.gpf");
    CHECK_THROWS_AS(read_real_field(dir / "k2.gpf"), FormatError);
  }

  SECTION("truncated payload") {
    auto f = random_smooth_field(g, 81);
    write_field(f, dir / "t.gpf");
    const auto full = fs::file_size(dir / "t.gpf");
    fs::resize_file(dir / "t.gpf", full - 64);
    CHECK_THROWS_AS(read_real_field(dir / "t.gpf"), FormatError);
  }

  SECTION("write rejects non-finite fields") {
    RealField f(g, 1.0);
    f.values[5] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(write_field(f, dir / "inf.gpf"), NonFiniteError);
  }
}
