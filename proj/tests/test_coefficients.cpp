// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "test_util.hpp"

using namespace gpv;

namespace {

const KwongProfile& kp256() { return gpvtest::kwong(256, 16.0); }

const PsiSet& psis(double lambda) {
  static std::map<double, PsiSet> cache;
  auto it = cache.find(lambda);
  if (it == cache.end()) it = cache.emplace(lambda, build_psi_set(lambda, kp256())).first;
  return it->second;
}

// -----------------------------------------------------------------------
// Radial finite-difference oracle (Lambda = 1). Solves the L-tilde equation
// in the even sector as a tridiagonal two-point BVP on [0, R], second order
// in h, Richardson-extrapolated. Independent of the spectral machinery.
// -----------------------------------------------------------------------
struct RadialOracle {
  const RadialProfile& prof;
  double R = 20.0;

  std::vector<double> solve_ltilde(const std::vector<double>& f, double h) const {
    const int n = static_cast<int>(std::lround(R / h));
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double r = h * i;
      const double w = prof.eval(r);
      const double diag = 1.0 - 3.0 * w * w;
      if (i == 0) {
        // symmetric origin: -lap = -2 psi'' with psi'(0) = 0
        b[0] = 4.0 / (h * h) + diag;
        c[0] = -4.0 / (h * h);
        d[0] = f[0];
      } else {
        a[i] = -1.0 / (h * h) + 1.0 / (2.0 * h * r);
        b[i] = 2.0 / (h * h) + diag;
        c[i] = -1.0 / (h * h) - 1.0 / (2.0 * h * r);
        d[i] = f[i];
      }
    }
    // Thomas sweep, psi(R) = 0
    for (int i = 1; i < n; ++i) {
      const double m = a[i] / b[i - 1];
      b[i] -= m * c[i - 1];
      d[i] -= m * d[i - 1];
    }
    std::vector<double> psi(n);
    psi[n - 1] = d[n - 1] / b[n - 1];
    for (int i = n - 2; i >= 0; --i) psi[i] = (d[i] - c[i] * psi[i + 1]) / b[i];
    return psi;
  }

  template <typename F>
  std::vector<double> sample(F&& fn, double h) const {
    const int n = static_cast<int>(std::lround(R / h));
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = fn(h * i);
    return out;
  }

  double integral(const std::vector<double>& f, double h) const {
    // 2 pi int f r dr, composite trapezoid (f decays to machine zero well
    // before R)
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double r = h * static_cast<double>(i);
      const double wgt = (i == 0 || i + 1 == f.size()) ? 0.5 : 1.0;
      s += wgt * f[i] * r;
    }
    return 2.0 * std::numbers::pi * s * h;
  }

  struct Result {
    double lam4, c_star, claim_lhs, claim_rhs_corrected;
  };

  Result run(double h) const {
    const double a_star = 2.0 * std::numbers::pi * radial_moment(prof, 1, 2);
    const double lam4 = 2.0 * std::numbers::pi * radial_moment(prof, 3, 2);
    auto w = sample([&](double r) { return prof.eval(r); }, h);
    auto rhs1 = sample(
        [&](double r) {
          const double wv = prof.eval(r);
          return -(lam4 / a_star) * wv * wv * wv - r * r * wv;
        },
        h);
    auto psi1 = solve_ltilde(rhs1, h);

    const int n = static_cast<int>(psi1.size());
    std::vector<double> rhs3(n), psi1sq(n), wpsi(n), claim_rhs(n), grad_sq(n);
    for (int i = 0; i < n; ++i) {
      const double r = h * i;
      const double wv = w[i], p1 = psi1[i];
      rhs3[i] = 3.0 * wv * p1 * p1 - (3.0 * lam4 / a_star * wv * wv + r * r) * p1;
      psi1sq[i] = p1 * p1;
      claim_rhs[i] = (3.0 * wv * wv - 1.0) * p1 * p1 - 4.0 * r * r * wv * p1;
    }
    auto psi3 = solve_ltilde(rhs3, h);
    for (int i = 0; i < n; ++i) wpsi[i] = w[i] * psi3[i];
    for (int i = 0; i < n; ++i) {
      const double dp = (i == 0) ? 0.0
                                 : (i + 1 < n ? (psi1[i + 1] - psi1[i - 1]) / (2 * h)
                                              : (psi1[i] - psi1[i - 1]) / h);
      grad_sq[i] = dp * dp;
    }
    Result res;
    res.lam4 = lam4;
    res.claim_lhs = 2.0 * integral(wpsi, h) + integral(psi1sq, h);
    res.claim_rhs_corrected = integral(claim_rhs, h) - integral(grad_sq, h);
    res.c_star = res.claim_lhs / (2.0 * lam4);
    return res;
  }

  // Richardson: second-order scheme, halved step
  Result extrapolated(double h) const {
    Result c = run(h), f = run(h / 2);
    Result out;
    out.lam4 = f.lam4;
    out.c_star = (4.0 * f.c_star - c.c_star) / 3.0;
    out.claim_lhs = (4.0 * f.claim_lhs - c.claim_lhs) / 3.0;
    out.claim_rhs_corrected = (4.0 * f.claim_rhs_corrected - c.claim_rhs_corrected) / 3.0;
    return out;
  }
};

} // namespace

TEST_CASE("lambda0 and the trap moments") {
  const auto& kp = kp256();

  SECTION("radial symmetry splits the trap moment") {
    const double m2 = trap_quadratic_moment(kp, 1.0) / 2.0; // int x1^2 w^2
    for (double lam : {0.5, 0.8}) {
      const double lam4 = std::pow(lambda0(lam, kp), 4);
      CHECK(lam4 == Catch::Approx((1.0 + lam * lam) * m2).epsilon(1e-10));
    }
  }

  SECTION("radial oracle value at Lambda = 1") {
    auto fix = gpvtest::load_fixture("kwong_oracle.json");
    const double lam4 = std::pow(lambda0(1.0, kp), 4);
    CHECK(lam4 ==
          Catch::Approx(fix["lambda0_pow4_radial_lambda1"].get<double>()).epsilon(1e-7));
  }

  SECTION("domain validation") {
    CHECK_THROWS_AS(lambda0(-0.5, kp), ValidationError);
  }
}

TEST_CASE("lemma identities") {
  const auto& kp = kp256();
  for (double lam : {0.5, 0.8}) {
    DYNAMIC_SECTION("Lambda = " << lam) {
      auto r = lemma32_report(kp, psis(lam));
      CHECK(std::abs(r.int_w_psi1) / r.scale_w_psi1 < 1e-7);
      CHECK(std::abs(r.int_w_psi2) / r.scale_w_psi2 < 1e-9);
      CHECK(std::abs(r.T1) / r.scale_T1 < 1e-7);
      const double lam4 = std::pow(psis(lam).lambda0, 4);
      CHECK(r.T2 == Catch::Approx(-2.0 * lam4).epsilon(1e-6));
      CHECK(r.T2 < 0.0);
    }
  }
}

TEST_CASE("angular-momentum pairings vanish") {
  const auto& kp = kp256();
  for (double lam : {0.5, 0.8}) {
    auto app = appendix_identities(kp, psis(lam));
    CHECK(std::abs(app.II1) < 1e-8);
    CHECK(std::abs(app.II2) < 1e-8);
  }
  // radial case: identically zero at sample level
  auto app1 = appendix_identities(kp, psis(1.0));
  CHECK(app1.II1 == 0.0);
  CHECK(app1.II2 == 0.0);
}

TEST_CASE("quartic-coefficient claim") {
  const auto& kp = kp256();
  for (double lam : {0.5, 0.8, 1.0}) {
    DYNAMIC_SECTION("Lambda = " << lam) {
      auto app = appendix_identities(kp, psis(lam));
      // the corrected identity closes to solver precision
      CHECK(app.lhs == Catch::Approx(app.rhs_corrected).epsilon(1e-7));
      // the printed identity is off by exactly the Dirichlet term of psi1
      CHECK(app.rhs_printed - app.lhs ==
            Catch::Approx(app.grad_psi1_sq).epsilon(1e-5));
    }
  }
}

TEST_CASE("c_star is finite, nonzero, and matches the frozen fixtures") {
  const auto& kp = kp256();
  auto fix = gpvtest::load_fixture("constants.json");
  for (const char* key : {"0.5", "0.8", "1.0"}) {
    const double lam = std::stod(key);
    const double c = c_star(lam, kp, psis(lam));
    CHECK(std::isfinite(c));
    CHECK(std::abs(c) > 0.1);
    CHECK(c == Catch::Approx(fix[key]["c_star"].get<double>()).epsilon(1e-6));
    CHECK(psis(lam).lambda0 ==
          Catch::Approx(fix[key]["lambda0"].get<double>()).epsilon(1e-6));
  }
}

TEST_CASE("c_star and the claim agree with the radial FD oracle at Lambda = 1") {
  auto prof = solve_kwong_radial(1e-12);
  RadialOracle oracle{prof};
  auto r = oracle.extrapolated(2e-3);

  const auto& kp = kp256();
  const double c2d = c_star(1.0, kp, psis(1.0));
  auto app = appendix_identities(kp, psis(1.0));

  CHECK(c2d == Catch::Approx(r.c_star).epsilon(5e-6));
  CHECK(app.lhs == Catch::Approx(r.claim_lhs).epsilon(5e-6));
  CHECK(app.rhs_corrected == Catch::Approx(r.claim_rhs_corrected).epsilon(2e-4));
}

TEST_CASE("pohozaev identity for the homogeneous trap") {
  const auto& kp = kp256();
  CHECK(pohozaev_check(0.8, kp) < 1e-10);
  CHECK(pohozaev_check(1.0, kp) < 1e-10);
  // adding a constant to V breaks homogeneity; the defect must show it
  CHECK(pohozaev_check(0.8, kp, 0.5) > 1e-2);
}

TEST_CASE("c_star is invariant under grid refinement", "[slow]") {
  auto prof = solve_kwong_radial(1e-12, 40.0);
  auto kp512 = rasterize(prof, GridSpec(512, 16.0), true);
  auto ps512 = build_psi_set(0.8, kp512);
  const double c512 = c_star(0.8, kp512, ps512);
  const double c256 = c_star(0.8, kp256(), psis(0.8));
  CHECK(c256 == Catch::Approx(c512).epsilon(5e-6));
}
