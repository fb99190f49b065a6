#include "doctest.h"

#include "zonal/fitting.hpp"
#include "zonal/jacobi.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace zonal;

namespace {

Eigen::ArrayXd random_ts(int count, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-0.999, 0.999);
  Eigen::ArrayXd t(count);
  for (int i = 0; i < count; ++i) t[i] = dist(gen);
  return t;
}

}  // namespace

TEST_CASE("parameter domain is enforced") {
  CHECK_THROWS_AS(JacobiParams(0.5, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(JacobiParams(0.0, -0.6), std::invalid_argument);
  CHECK_NOTHROW(JacobiParams(-0.5, -0.5));
  CHECK_NOTHROW(JacobiParams(1.0, 0.5));
}

TEST_CASE("degree-one closed form") {
  // P_1(t) = (a+1) + (a+b+2)(t-1)/2.
  CHECK(jacobi_poly(JacobiParams(1.0, 0.0), 1, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(jacobi_poly(JacobiParams(0.5, 0.0), 1, 0.0) ==
        doctest::Approx(0.25).epsilon(1e-14));
  const JacobiParams pr(0.3, 0.1);
  for (double t : {-0.7, 0.0, 0.4, 1.0}) {
    const double expected = (pr.alpha + 1.0) + (pr.sum() + 2.0) * (t - 1.0) / 2.0;
    CHECK(jacobi_poly(pr, 1, t) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("value at the right endpoint is the binomial ratio") {
  // P_3^{(0.5,0)}(1) = 3.5*2.5*1.5/3! = 2.1875.
  CHECK(jacobi_poly(JacobiParams(0.5, 0.0), 3, 1.0) ==
        doctest::Approx(2.1875).epsilon(1e-13));
  for (int k : {0, 1, 2, 5, 9, 20}) {
    const JacobiParams pr(1.0, 0.5);
    const double expected = std::exp(std::lgamma(k + pr.alpha + 1.0) -
                                     std::lgamma(k + 1.0) - std::lgamma(pr.alpha + 1.0));
    CHECK(jacobi_poly(pr, k, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("batch evaluation matches scalar") {
  const JacobiParams pr(0.5, 0.0);
  const Eigen::ArrayXd t = random_ts(17, 11);
  for (int k : {0, 1, 2, 7, 23}) {
    const Eigen::ArrayXd batch = jacobi_poly(pr, k, t);
    for (int i = 0; i < t.size(); ++i) {
      CHECK(batch[i] == doctest::Approx(jacobi_poly(pr, k, t[i])).epsilon(1e-13));
    }
  }
}

TEST_CASE("normalized kernel basics") {
  const JacobiParams leg(0.0, 0.0);
  CHECK(kernel_E(leg, 0, 0.37) == doctest::Approx(1.0).epsilon(1e-14));
  // E_1 = 3t for the Legendre parameters.
  CHECK(kernel_E(leg, 1, 0.37) == doctest::Approx(3.0 * 0.37).epsilon(1e-14));
  CHECK(kernel_E_at_one(leg, 1) == doctest::Approx(3.0).epsilon(1e-14));
  for (int k : {0, 1, 2, 5, 40}) {
    const JacobiParams pr(1.0, 0.5);
    CHECK(kernel_E_at_one(pr, k) ==
          doctest::Approx(kernel_E(pr, k, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("partial sums collapse to a raised-parameter kernel value") {
  // Degree 1, (0,0): 1 + 3t must equal E_1^{(1,0)}(t)/4.
  const double t0 = 0.25;
  CHECK(kernel_E(JacobiParams(1.0, 0.0), 1, t0) / 4.0 ==
        doctest::Approx(1.0 + 3.0 * t0).epsilon(1e-14));

  const Eigen::ArrayXd ts = random_ts(20, 5);
  for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{0.5, 0.0}, std::pair{1.0, 0.5}}) {
    const JacobiParams pr(a, b);
    const JacobiParams raised(a + 1.0, b);
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(ts.size());
    for (int k = 0; k <= 50; ++k) {
      acc += kernel_E(pr, k, ts);
      const Eigen::ArrayXd rhs = kernel_E(raised, k, ts) / (2.0 * k + a + b + 2.0);
      for (int i = 0; i < ts.size(); ++i) {
        CHECK(acc[i] == doctest::Approx(rhs[i]).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("gamma ratio asymptotics and overflow guard") {
  // Gamma(x+a)/Gamma(x) ~ x^a for large x.
  const double x = 1.0e6, a = 0.75;
  CHECK(gamma_ratio(x + a, x) / std::pow(x, a) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS_AS(gamma_ratio(400.0, 1.0), std::range_error);
  CHECK_THROWS_AS(gamma_ratio(-1.0, 2.0), std::invalid_argument);
}

TEST_CASE("gauss rule integrates the trig weight exactly") {
  SUBCASE("legendre-type parameters") {
    const JacobiParams pr(0.0, 0.0);
    const auto rule = gauss_jacobi_rule(pr, 12);
    CHECK(rule.weight.sum() == doctest::Approx(1.0).epsilon(1e-13));
    for (int j = 0; j <= rule.exactness && j <= 12; ++j) {
      const double val = (rule.weight * rule.theta.cos().pow(j)).sum();
      const double expected = (j % 2 == 0) ? 1.0 / (j + 1.0) : 0.0;
      if (j % 2 == 0) {
        CHECK(val == doctest::Approx(expected).epsilon(1e-12));
      } else {
        CHECK(std::abs(val) < 1e-13);
      }
    }
  }
  SUBCASE("half-integer parameters") {
    const JacobiParams pr(0.5, 0.0);
    const auto rule = gauss_jacobi_rule(pr, 10);
    CHECK(rule.weight.sum() == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    const auto ref = gauss_jacobi_rule(pr, 10, 3);
    for (int j = 0; j <= 10; ++j) {
      const double val = (rule.weight * rule.theta.cos().pow(j)).sum();
      const double expected = (ref.weight * ref.theta.cos().pow(j)).sum();
      CHECK(val == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("endpoint parameters") {
    const JacobiParams pr(-0.5, -0.5);
    const auto rule = gauss_jacobi_rule(pr, 8);
    CHECK(rule.weight.sum() == doctest::Approx(M_PI).epsilon(1e-13));
  }
  SUBCASE("mass helper agrees") {
    for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{0.5, 0.0}, std::pair{1.0, 0.5}}) {
      const JacobiParams pr(a, b);
      const auto rule = gauss_jacobi_rule(pr, 6);
      CHECK(rule.weight.sum() == doctest::Approx(trig_weight_mass(pr)).epsilon(1e-12));
    }
  }
}

TEST_CASE("weighted norm: constant and polynomial oracles") {
  SUBCASE("constant function, quasi-norm range") {
    const JacobiParams pr(0.5, 0.0);
    const double p = 0.7;
    const double expected = 2.0 * std::pow(2.0 / 3.0, 1.0 / p);
    const double val = weighted_norm_1d(
        [](const Eigen::ArrayXd& t) { return Eigen::ArrayXd::Constant(t.size(), 2.0); }, p,
        pr);
    CHECK(val == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("polynomial at p=2 matches the exact Gauss evaluation") {
    const JacobiParams pr(1.0, 0.5);
    auto g = [](const Eigen::ArrayXd& t) -> Eigen::ArrayXd {
      return t * t * t - 0.3 * t + 0.1;
    };
    const auto rule = gauss_jacobi_rule(pr, 6);
    const Eigen::ArrayXd vals = g(rule.theta.cos());
    const double exact = std::sqrt((rule.weight * vals * vals).sum());
    NormOptions opt;
    opt.tol = 1e-12;
    CHECK(weighted_norm_1d(g, 2.0, pr, opt) == doctest::Approx(exact).epsilon(1e-10));
    opt.split_zeros = true;
    CHECK(weighted_norm_1d(g, 2.0, pr, opt) == doctest::Approx(exact).epsilon(1e-9));
  }
  SUBCASE("split and composite engines agree below p=1") {
    const JacobiParams pr(0.0, 0.0);
    auto g = [](const Eigen::ArrayXd& t) -> Eigen::ArrayXd {
      return (5.0 * t).sin() + 0.2;
    };
    NormOptions opt;
    opt.osc_degree = 5;
    opt.tol = 1e-6;
    const double composite = weighted_norm_1d(g, 0.4, pr, opt);
    opt.tol = 1e-9;
    opt.split_zeros = true;
    const double split = weighted_norm_1d(g, 0.4, pr, opt);
    CHECK(split == doctest::Approx(composite).epsilon(1e-5));
  }
  SUBCASE("unconverged quadrature reports failure") {
    NormOptions opt;
    opt.max_doublings = 0;
    opt.tol = 1e-14;
    auto g = [](const Eigen::ArrayXd& t) -> Eigen::ArrayXd { return (40.0 * t).sin(); };
    CHECK_THROWS_AS(weighted_norm_1d(g, 0.4, JacobiParams(0.0, 0.0), opt),
                    std::runtime_error);
  }
  SUBCASE("p outside the quasi-norm range is rejected") {
    auto g = [](const Eigen::ArrayXd& t) -> Eigen::ArrayXd { return t; };
    CHECK_THROWS_AS(weighted_norm_1d(g, 0.0, JacobiParams(0.0, 0.0)),
                    std::invalid_argument);
  }
}

TEST_CASE("series helper matches direct accumulation") {
  const JacobiParams pr(0.5, 0.5);
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd w(13);
  for (int i = 0; i < w.size(); ++i) w[i] = dist(gen);
  const Eigen::ArrayXd ts = random_ts(9, 3);
  const Eigen::ArrayXd batch = jacobi_series(pr, w, ts);
  for (int i = 0; i < ts.size(); ++i) {
    double direct = 0.0;
    for (int k = 0; k < w.size(); ++k) direct += w[k] * jacobi_poly(pr, k, ts[i]);
    CHECK(batch[i] == doctest::Approx(direct).epsilon(1e-12));
    CHECK(jacobi_series(pr, w, ts[i]) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("kernel values decay away from the endpoint") {
  // |E_k(cos theta)| <= C k^{a+1/2} theta^{-(a+1/2)} (pi-theta)^{-(b+1/2)}
  // inside [1/k, pi - 1/k]; the implied constant stays in a narrow band.
  for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{0.5, 0.0}}) {
    const JacobiParams pr(a, b);
    std::vector<double> fitted;
    for (int k : {16, 32, 64, 128}) {
      const int m = 800;
      double cmax = 0.0;
      for (int i = 0; i < m; ++i) {
        const double lo = 1.0 / k, hi = M_PI - 1.0 / k;
        const double theta = lo + (hi - lo) * i / (m - 1.0);
        const double val = std::abs(kernel_E(pr, k, std::cos(theta)));
        const double envelope = std::pow(static_cast<double>(k), a + 0.5) *
                                std::pow(theta, -(a + 0.5)) *
                                std::pow(M_PI - theta, -(b + 0.5));
        cmax = std::max(cmax, val / envelope);
      }
      fitted.push_back(cmax);
    }
    CHECK(band_ratio(fitted) < 8.0);
  }
}

TEST_CASE("kernel values stay large near the endpoint") {
  // E_k(cos theta) >= E_k(1)/2 for theta <= 1/(2k).
  for (auto [a, b] : {std::pair{0.0, 0.0}, std::pair{0.5, 0.0}, std::pair{1.0, 0.5}}) {
    const JacobiParams pr(a, b);
    for (int k : {4, 16, 64, 256}) {
      const double at_one = kernel_E_at_one(pr, k);
      for (int i = 0; i <= 50; ++i) {
        const double theta = (1.0 / (2.0 * k)) * i / 50.0;
        CHECK(kernel_E(pr, k, std::cos(theta)) >= 0.5 * at_one * (1.0 - 1e-12));
      }
    }
  }
}
