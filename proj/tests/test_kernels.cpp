#include "doctest.h"

#include "zonal/fitting.hpp"
#include "zonal/jacobi.hpp"
#include "zonal/kernels.hpp"

#include <cmath>
#include <vector>

using namespace zonal;

TEST_CASE("cutoff plateau, support and midpoint symmetry") {
  CHECK(eta_eval(0.0) == 1.0);
  CHECK(eta_eval(1.0) == 1.0);
  CHECK(eta_eval(2.0) == 0.0);
  CHECK(eta_eval(2.7) == 0.0);
  CHECK(eta_eval(1.5) == doctest::Approx(0.5).epsilon(1e-14));
  double prev = 1.0;
  for (int i = 1; i <= 40; ++i) {
    const double v = eta_eval(1.0 + i / 40.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
  CHECK(cutoff_eval(CutoffKind::eta, 0.5) == 1.0);
  CHECK(cutoff_eval(CutoffKind::psi, 0.5) == 0.0);
}

TEST_CASE("ring cutoff forms a dyadic partition of unity") {
  CHECK(psi_eval(0.9) == 0.0);
  CHECK(psi_eval(4.0) == 0.0);
  for (double x : {1.2, 2.0, 3.3, 3.9}) CHECK(psi_eval(x) >= 0.0);
  for (double x : {2.0, 3.0, 7.3, 50.0, 900.0}) {
    double acc = 0.0;
    for (int j = 0; j <= 12; ++j) acc += psi_eval(x / std::pow(2.0, j));
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("fractional-symbol coefficients") {
  const JacobiParams pr(0.0, 0.0);
  const ZonalKernel g = build_G(pr, 2, 2.0);
  CHECK(g.degree() == 4);
  CHECK(g.coeff[0] == 0.0);
  CHECK(g.coeff[1] == doctest::Approx(2.0).epsilon(1e-14));  // (1*2)^1 * eta(1/2)
  CHECK(g.coeff[4] == 0.0);                                  // eta(2) = 0
  const ZonalKernel plain = build_G(pr, 2, 0.0);
  CHECK(plain.coeff[0] == 1.0);
  CHECK(plain.coeff[2] == 1.0);  // eta(1) = 1
}

TEST_CASE("peak value scales like the expected power") {
  for (double a : {0.0, 0.5}) {
    const JacobiParams pr(a, a == 0.5 ? 0.0 : 0.0);
    std::vector<double> fitted;
    for (int n : {16, 32, 64, 128, 256, 512}) {
      const double peak = eval_zonal(build_G(pr, n, 0.0), 1.0);
      fitted.push_back(peak / std::pow(n, 2.0 * a + 2.0));
    }
    CHECK(band_ratio(fitted) < 4.0);
  }
}

TEST_CASE("normalized kernel has unit surface mean") {
  SUBCASE("leading coefficient, d=3 and d=5") {
    CHECK(build_K(3, 6).coeff[0] == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-13));
    // c_0 * E_0^{(1,1)} * |S^4| = 1 with E_0 = Gamma(4)/Gamma(2) = 6 and
    // |S^4| = 8 pi^2 / 3.
    CHECK(build_K(5, 4).coeff[0] ==
          doctest::Approx(1.0 / (16.0 * M_PI * M_PI)).epsilon(1e-13));
  }
  SUBCASE("surface integral via the 1-D rule") {
    for (int n : {4, 16, 64}) {
      const ZonalKernel k = build_K(3, n);
      const auto rule = gauss_jacobi_rule(k.params, k.degree() + 1);
      const double mean = 4.0 * M_PI * (rule.weight * eval_zonal(k, rule.theta.cos())).sum();
      CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("cesaro numbers and kernel coefficients") {
  CHECK(cesaro_number(1.0, 2) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(cesaro_number(2.0, 3) == doctest::Approx(10.0).epsilon(1e-13));
  const ZonalKernel s = build_cesaro(JacobiParams(0.0, 0.0), 4, 1.0);
  CHECK(s.degree() == 4);
  CHECK(s.coeff[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.coeff[4] == doctest::Approx(1.0 / 5.0).epsilon(1e-14));
}

TEST_CASE("cesaro kernel stays nonnegative at the classical order") {
  const JacobiParams pr(0.0, 0.0);
  // delta >= alpha + beta + 2 guarantees nonnegativity on [-1,1].
  for (int n : {5, 17, 50}) {
    const ZonalKernel s = build_cesaro(pr, n, 2.0);
    Eigen::ArrayXd t(501);
    for (int i = 0; i <= 500; ++i) t[i] = -1.0 + 2.0 * i / 500.0;
    const double peak = eval_zonal(s, 1.0);
    CHECK(eval_zonal(s, t).minCoeff() >= -1e-10 * peak);
  }
}

TEST_CASE("cesaro kernel decays at the critical-order rate") {
  const JacobiParams pr(0.0, 0.0);
  const double delta = pr.alpha + 1.5;
  std::vector<double> fitted;
  for (int n : {32, 64, 128}) {
    const ZonalKernel s = build_cesaro(pr, n, delta);
    double cmax = 0.0;
    for (int i = 0; i <= 600; ++i) {
      const double theta = (M_PI / 2.0) * i / 600.0;
      const double val = std::abs(eval_zonal(s, std::cos(theta)));
      const double envelope = std::pow(static_cast<double>(n), 2.0 * pr.alpha + 2.0) *
                              std::pow(1.0 + n * theta, -(2.0 * pr.alpha + 3.0));
      cmax = std::max(cmax, val / envelope);
    }
    fitted.push_back(cmax);
  }
  CHECK(band_ratio(fitted) < 8.0);
}

TEST_CASE("smooth cutoff kernels localize at every polynomial order") {
  const JacobiParams pr(0.0, 0.0);
  const double ell = 6.0;
  std::vector<double> fitted;
  for (int n : {32, 64, 128}) {
    const ZonalKernel b = build_G(pr, n, 0.0);
    double cmax = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double theta = M_PI * i / 1000.0;
      const double val = std::abs(eval_zonal(b, std::cos(theta)));
      const double envelope =
          std::pow(static_cast<double>(n), 2.0) * std::pow(1.0 + n * theta, -ell);
      cmax = std::max(cmax, val / envelope);
    }
    fitted.push_back(cmax);
  }
  CHECK(band_ratio(fitted) < 8.0);
}

TEST_CASE("norm growth exponents at a sub-unit exponent") {
  const JacobiParams pr(0.0, 0.0);
  const double p = 0.4;
  std::vector<double> ns, base;
  for (int n : {32, 64, 128}) {
    const double val = kernel_norm(build_G(pr, n, 0.0), p);
    ns.push_back(n);
    base.push_back(val);
  }
  // (2a+2)(1 - 1/p) = -3 at a = 0, p = 0.4.
  CHECK(fit_loglog_slope(ns, base) == doctest::Approx(-3.0).epsilon(0.12));

  std::vector<double> ratio;
  for (size_t i = 0; i < ns.size(); ++i) {
    const double num = kernel_norm(build_G(pr, static_cast<int>(ns[i]), 4.0), p);
    ratio.push_back(num / base[i]);
  }
  // r = 4 exceeds the critical index 3, so the ratio grows like n^4.
  CHECK(fit_loglog_slope(ns, ratio) == doctest::Approx(4.0).epsilon(0.12));
}

TEST_CASE("summation-by-parts constants") {
  CHECK(sbp_gamma(1.7, 0) == 2.0);
  CHECK(sbp_gamma(1.7, 1) == doctest::Approx(-1.7).epsilon(1e-14));
  CHECK(sbp_gamma(3.0, 2) == doctest::Approx(1.5).epsilon(1e-14));

  const JacobiParams pr(0.0, 0.0);
  const double r = 1.5;
  const int n = 50000, s = 400;
  const Eigen::VectorXd a0 = sbp_coefficients(pr, n, r, 0, s + 2);
  CHECK(a0[s] / std::pow(s, r + 1.0) == doctest::Approx(2.0).epsilon(0.01));
  const Eigen::VectorXd a1 = sbp_coefficients(pr, n, r, 1, s + 2);
  CHECK(a1[s] / std::pow(s, r - 1.0) == doctest::Approx(-r).epsilon(0.01));
}

TEST_CASE("summation-by-parts representation reconstructs the kernel") {
  const JacobiParams pr(0.0, 0.0);
  const auto rep = sbp_representation(pr, 64, 1.5);
  CHECK(rep.ell == 4);  // smallest integer above alpha+beta+r+2 = 3.5
  CHECK(rep.max_rel_error < 1e-6);
  CHECK(rep.fitted_scale != 0.0);
}

TEST_CASE("summation-by-parts rejects degenerate symbols") {
  CHECK_THROWS_AS(sbp_representation(JacobiParams(0.0, 0.0), 16, 2.0), std::domain_error);
  CHECK_THROWS_AS(sbp_representation(JacobiParams(-0.5, -0.5), 16, 1.0),
                  std::domain_error);
  CHECK_NOTHROW(sbp_representation(JacobiParams(-0.5, -0.5), 16, 1.5));
}
