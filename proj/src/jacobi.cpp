#include "zonal/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace zonal {

JacobiParams::JacobiParams(double a, double b) : alpha(a), beta(b) {
  if (!(a >= b && b >= -0.5)) {
    throw std::invalid_argument("JacobiParams: need alpha >= beta >= -1/2");
  }
}

double gamma_ratio(double num, double den) {
  if (!(num > 0.0) || !(den > 0.0)) {
    throw std::invalid_argument("gamma_ratio: arguments must be positive");
  }
  const double lg = std::lgamma(num) - std::lgamma(den);
  if (lg > 700.0) {
    throw std::range_error("gamma_ratio: result overflows double");
  }
  return std::exp(lg);
}

namespace {

// Coefficients of P_k = ((c2*t + c3)*P_{k-1} - c4*P_{k-2}) / c1 for k >= 2.
struct RecurrenceCoef {
  double c1, c2, c3, c4;
};

RecurrenceCoef recurrence_coef(const JacobiParams& pr, int k) {
  const double a = pr.alpha, b = pr.beta, s = pr.sum();
  const double dk = static_cast<double>(k);
  RecurrenceCoef c;
  c.c1 = 2.0 * dk * (dk + s) * (2.0 * dk + s - 2.0);
  c.c2 = (2.0 * dk + s - 1.0) * (2.0 * dk + s) * (2.0 * dk + s - 2.0);
  c.c3 = (2.0 * dk + s - 1.0) * (a * a - b * b);
  c.c4 = 2.0 * (dk + a - 1.0) * (dk + b - 1.0) * (2.0 * dk + s);
  return c;
}

double poly_p1(const JacobiParams& pr, double t) {
  return (pr.alpha + 1.0) + (pr.sum() + 2.0) * (t - 1.0) / 2.0;
}

}  // namespace

double jacobi_poly(const JacobiParams& pr, int k, double t) {
  if (k < 0) throw std::invalid_argument("jacobi_poly: negative degree");
  if (k == 0) return 1.0;
  double pm1 = 1.0;
  double p = poly_p1(pr, t);
  for (int j = 2; j <= k; ++j) {
    const RecurrenceCoef c = recurrence_coef(pr, j);
    const double pj = ((c.c2 * t + c.c3) * p - c.c4 * pm1) / c.c1;
    pm1 = p;
    p = pj;
  }
  return p;
}

Eigen::ArrayXd jacobi_poly(const JacobiParams& pr, int k, const Eigen::ArrayXd& t) {
  if (k < 0) throw std::invalid_argument("jacobi_poly: negative degree");
  Eigen::ArrayXd pm1 = Eigen::ArrayXd::Ones(t.size());
  if (k == 0) return pm1;
  Eigen::ArrayXd p = (pr.alpha + 1.0) + (pr.sum() + 2.0) * (t - 1.0) / 2.0;
  Eigen::ArrayXd pj(t.size());
  for (int j = 2; j <= k; ++j) {
    const RecurrenceCoef c = recurrence_coef(pr, j);
    pj = ((c.c2 * t + c.c3) * p - c.c4 * pm1) / c.c1;
    pm1.swap(p);
    p.swap(pj);
  }
  return p;
}

double kernel_norm_factor(const JacobiParams& pr, int k) {
  if (k < 0) throw std::invalid_argument("kernel_norm_factor: negative degree");
  const double s = pr.sum();
  if (k == 0) {
    // (s+1)Gamma(s+1) = Gamma(s+2), valid also when s+1 == 0.
    return gamma_ratio(s + 2.0, pr.beta + 1.0);
  }
  return (2.0 * k + s + 1.0) * gamma_ratio(k + s + 1.0, k + pr.beta + 1.0);
}

double kernel_E(const JacobiParams& pr, int k, double t) {
  return kernel_norm_factor(pr, k) * jacobi_poly(pr, k, t);
}

Eigen::ArrayXd kernel_E(const JacobiParams& pr, int k, const Eigen::ArrayXd& t) {
  return kernel_norm_factor(pr, k) * jacobi_poly(pr, k, t);
}

double kernel_E_at_one(const JacobiParams& pr, int k) {
  // P_k(1) = Gamma(k+a+1) / (Gamma(k+1) Gamma(a+1)).
  const double pk1 = std::exp(std::lgamma(k + pr.alpha + 1.0) - std::lgamma(k + 1.0) -
                              std::lgamma(pr.alpha + 1.0));
  return kernel_norm_factor(pr, k) * pk1;
}

double jacobi_series(const JacobiParams& pr, const Eigen::VectorXd& w, double t) {
  const int n = static_cast<int>(w.size()) - 1;
  if (n < 0) return 0.0;
  double acc = w[0];
  if (n == 0) return acc;
  double pm1 = 1.0;
  double p = poly_p1(pr, t);
  acc += w[1] * p;
  for (int j = 2; j <= n; ++j) {
    const RecurrenceCoef c = recurrence_coef(pr, j);
    const double pj = ((c.c2 * t + c.c3) * p - c.c4 * pm1) / c.c1;
    pm1 = p;
    p = pj;
    acc += w[j] * p;
  }
  return acc;
}

Eigen::ArrayXd jacobi_series(const JacobiParams& pr, const Eigen::VectorXd& w,
                             const Eigen::ArrayXd& t) {
  const int n = static_cast<int>(w.size()) - 1;
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(t.size());
  if (n < 0) return acc;
  acc += w[0];
  if (n == 0) return acc;
  Eigen::ArrayXd pm1 = Eigen::ArrayXd::Ones(t.size());
  Eigen::ArrayXd p = (pr.alpha + 1.0) + (pr.sum() + 2.0) * (t - 1.0) / 2.0;
  acc += w[1] * p;
  Eigen::ArrayXd pj(t.size());
  for (int j = 2; j <= n; ++j) {
    const RecurrenceCoef c = recurrence_coef(pr, j);
    pj = ((c.c2 * t + c.c3) * p - c.c4 * pm1) / c.c1;
    pm1.swap(p);
    p.swap(pj);
    acc += w[j] * p;
  }
  return acc;
}

Eigen::ArrayXd jacobi_series_ext(const JacobiParams& pr, const Eigen::VectorXd& w,
                                 const Eigen::ArrayXd& t) {
  const int n = static_cast<int>(w.size()) - 1;
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(t.size());
  if (n < 0) return out;
  const long double a = pr.alpha, b = pr.beta, s = pr.sum();
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const long double x = t[i];
    long double acc = w[0];
    if (n > 0) {
      long double pm1 = 1.0L;
      long double p = (a + 1.0L) + (s + 2.0L) * (x - 1.0L) / 2.0L;
      acc += static_cast<long double>(w[1]) * p;
      for (int j = 2; j <= n; ++j) {
        const long double dj = j;
        const long double c1 = 2.0L * dj * (dj + s) * (2.0L * dj + s - 2.0L);
        const long double c2 =
            (2.0L * dj + s - 1.0L) * (2.0L * dj + s) * (2.0L * dj + s - 2.0L);
        const long double c3 = (2.0L * dj + s - 1.0L) * (a * a - b * b);
        const long double c4 =
            2.0L * (dj + a - 1.0L) * (dj + b - 1.0L) * (2.0L * dj + s);
        const long double pj = ((c2 * x + c3) * p - c4 * pm1) / c1;
        pm1 = p;
        p = pj;
        acc += static_cast<long double>(w[j]) * p;
      }
    }
    out[i] = static_cast<double>(acc);
  }
  return out;
}

void gauss_jacobi(double a, double b, int m, Eigen::ArrayXd& x, Eigen::ArrayXd& w) {
  if (m < 1) throw std::invalid_argument("gauss_jacobi: need at least one node");
  if (!(a > -1.0) || !(b > -1.0)) {
    throw std::invalid_argument("gauss_jacobi: exponents must exceed -1");
  }
  const double s = a + b;
  Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
  diag[0] = (b - a) / (s + 2.0);
  for (int k = 1; k < m; ++k) {
    const double q = 2.0 * k + s;
    diag[k] = (b * b - a * a) / (q * (q + 2.0));
  }
  for (int k = 1; k < m; ++k) {
    double bk;
    if (k == 1) {
      // (k+s)/(2k+s-1) cancelled analytically; safe at s = -1.
      bk = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + s) * (2.0 + s) * (3.0 + s));
    } else {
      const double q = 2.0 * k + s;
      bk = 4.0 * k * (k + a) * (k + b) * (k + s) / (q * q * (q + 1.0) * (q - 1.0));
    }
    sub[k - 1] = std::sqrt(bk);
  }
  const double mu0 =
      std::exp((s + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
               std::lgamma(s + 2.0));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("gauss_jacobi: tridiagonal eigensolve failed");
  }
  x = es.eigenvalues().array();
  w = mu0 * es.eigenvectors().row(0).array().square();
  x = x.min(1.0).max(-1.0);
}

void gauss_legendre(int m, Eigen::ArrayXd& x, Eigen::ArrayXd& w) {
  gauss_jacobi(0.0, 0.0, m, x, w);
}

QuadratureRule1D gauss_jacobi_rule(const JacobiParams& pr, int target_degree,
                                   int oversample) {
  if (target_degree < 0) throw std::invalid_argument("gauss_jacobi_rule: bad degree");
  if (oversample < 1) throw std::invalid_argument("gauss_jacobi_rule: oversample >= 1");
  const int m = std::max(1, (target_degree + 2) / 2) * oversample;
  Eigen::ArrayXd x, w;
  gauss_jacobi(pr.alpha, pr.beta, m, x, w);
  // The theta-measure equals 2^-(a+b+1) (1-t)^a (1+t)^b dt under t = cos(theta).
  const double scale = std::exp(-(pr.sum() + 1.0) * std::log(2.0));
  QuadratureRule1D rule;
  rule.theta = x.reverse().unaryExpr([](double v) { return std::acos(v); });
  rule.weight = scale * w.reverse();
  rule.exactness = 2 * m - 1;
  return rule;
}

double trig_weight_mass(const JacobiParams& pr) {
  return std::exp(std::lgamma(pr.alpha + 1.0) + std::lgamma(pr.beta + 1.0) -
                  std::lgamma(pr.sum() + 2.0));
}

namespace {

double default_tol(double p, double tol) {
  if (tol > 0.0) return tol;
  return p < 0.5 ? 1e-5 : 1e-6;
}

// One composite pass: K uniform panels on [0,pi], fixed Gauss order.
double composite_pass(const BatchFn& g, double p, const JacobiParams& pr, int K,
                      const Eigen::ArrayXd& xg, const Eigen::ArrayXd& wg) {
  const int q = static_cast<int>(xg.size());
  const double h = M_PI / K;
  Eigen::ArrayXd theta(static_cast<Eigen::Index>(K) * q);
  for (int i = 0; i < K; ++i) {
    const double lo = i * h;
    for (int j = 0; j < q; ++j) theta[static_cast<Eigen::Index>(i) * q + j] = lo + h * (1.0 + xg[j]) / 2.0;
  }
  const Eigen::ArrayXd vals = g(theta.cos());
  const double ea = 2.0 * pr.alpha + 1.0, eb = 2.0 * pr.beta + 1.0;
  const Eigen::ArrayXd rho =
      (theta / 2.0).sin().pow(ea) * (theta / 2.0).cos().pow(eb);
  const Eigen::ArrayXd integrand = vals.abs().pow(p) * rho;
  double total = 0.0;
  for (int i = 0; i < K; ++i) {
    double acc = 0.0;
    for (int j = 0; j < q; ++j) acc += wg[j] * integrand[static_cast<Eigen::Index>(i) * q + j];
    total += acc * h / 2.0;
  }
  return total;
}

double scalar_eval(const BatchFn& g, double t) {
  Eigen::ArrayXd one(1);
  one[0] = t;
  return g(one)[0];
}

// Gauss-Jacobi rule cache keyed by (right exponent, left exponent, order).
const std::pair<Eigen::ArrayXd, Eigen::ArrayXd>& cached_gj(double a, double b, int m) {
  static std::map<std::tuple<double, double, int>, std::pair<Eigen::ArrayXd, Eigen::ArrayXd>>
      cache;
  auto key = std::make_tuple(a, b, m);
  auto it = cache.find(key);
  if (it == cache.end()) {
    Eigen::ArrayXd x, w;
    gauss_jacobi(a, b, m, x, w);
    it = cache.emplace(key, std::make_pair(std::move(x), std::move(w))).first;
  }
  return it->second;
}

// Sign changes of g(cos theta) on (0,pi), polished by bisection, plus the
// right end of the trustworthy range.  Values at the roundoff floor of the
// evaluation are noise, not signal: sign flips there are dropped, and if the
// samples end in a below-floor run the range is cut where that run starts
// (the true mass beyond it is smaller still).
struct OscillationScan {
  std::vector<double> zeros;
  double cut = M_PI;
};

OscillationScan locate_zeros(const BatchFn& g, int osc_degree,
                             double noise_floor) {
  const int ns = std::max(256, 16 * osc_degree);
  Eigen::ArrayXd theta(ns);
  for (int i = 0; i < ns; ++i) theta[i] = M_PI * (i + 0.5) / ns;
  const Eigen::ArrayXd v = g(theta.cos());
  // evaluation roundoff grows with the recurrence length; keep the floor a
  // safe factor above it
  if (noise_floor <= 0.0) {
    noise_floor = std::max(1e-13, 8.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(osc_degree, 1));
  }
  const double floor = noise_floor * v.abs().maxCoeff();
  OscillationScan scan;
  int last_live = ns - 1;
  while (last_live > 0 && std::abs(v[last_live]) <= floor) --last_live;
  if (last_live + 1 < ns) scan.cut = theta[last_live + 1];
  for (int i = 0; i + 1 <= last_live; ++i) {
    double lo = theta[i], hi = theta[i + 1];
    double flo = v[i], fhi = v[i + 1];
    if (flo == 0.0) {
      scan.zeros.push_back(lo);
      continue;
    }
    if (flo * fhi >= 0.0) continue;
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = scalar_eval(g, std::cos(mid));
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if (flo * fm < 0.0) {
        hi = mid;
      } else {
        lo = mid;
        flo = fm;
      }
    }
    scan.zeros.push_back(0.5 * (lo + hi));
  }
  return scan;
}

// Integral over [l,r] with algebraic endpoint exponents eb at l and ea at r:
//   Int (theta-l)^eb (r-theta)^ea u(theta) dtheta,
// where u collects |g|^p and the trig density with the endpoint factors removed.
double split_interval(const BatchFn& g, double p, const JacobiParams& pr, double l,
                      double r, double eb, double ea, int order) {
  const auto& [xg, wg] = cached_gj(ea, eb, order);
  const double half = (r - l) / 2.0;
  Eigen::ArrayXd theta = l + half * (1.0 + xg);
  const Eigen::ArrayXd vals = g(theta.cos()).abs();
  const double pa = 2.0 * pr.alpha + 1.0, pb = 2.0 * pr.beta + 1.0;
  Eigen::ArrayXd logu(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (vals[i] == 0.0) {
      logu[i] = -std::numeric_limits<double>::infinity();
      continue;
    }
    logu[i] = p * std::log(vals[i]) + pa * std::log(std::sin(theta[i] / 2.0)) +
              pb * std::log(std::cos(theta[i] / 2.0)) - eb * std::log(theta[i] - l) -
              ea * std::log(r - theta[i]);
  }
  const double acc = (wg * logu.exp()).sum();
  return std::pow(half, ea + eb + 1.0) * acc;
}

// A breakpoint is either a root of g (the |g|^p cusp exponent applies) or a
// plain cut inserted to keep panels short (smooth, exponent zero).
struct BreakPoint {
  double theta;
  bool cusp;
};

double split_pass(const BatchFn& g, double p, const JacobiParams& pr,
                  const std::vector<BreakPoint>& breaks, double end_exponent,
                  int order) {
  double total = 0.0;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double l = breaks[i].theta, r = breaks[i + 1].theta;
    const double eb =
        (i == 0) ? 2.0 * pr.alpha + 1.0 : (breaks[i].cusp ? p : 0.0);
    const double ea = (i + 2 == breaks.size()) ? end_exponent
                                               : (breaks[i + 1].cusp ? p : 0.0);
    total += split_interval(g, p, pr, l, r, eb, ea, order);
  }
  return total;
}

}  // namespace

double weighted_norm_1d(const BatchFn& g, double p, const JacobiParams& pr,
                        NormOptions opt) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw std::invalid_argument("weighted_norm_1d: need 0 < p < inf");
  }
  const double tol = default_tol(p, opt.tol);

  if (opt.split_zeros) {
    const OscillationScan scan =
        locate_zeros(g, opt.osc_degree, opt.noise_floor);
    std::vector<BreakPoint> breaks{{0.0, false}};
    for (double z : scan.zeros) {
      if (z > breaks.back().theta + 1e-11 && z < scan.cut - 1e-11) {
        breaks.push_back({z, true});
      }
    }
    breaks.push_back({scan.cut, false});
    // a truncated range ends at a plain cut, the full range at the measure
    // endpoint
    const double end_exponent =
        (scan.cut == M_PI) ? 2.0 * pr.beta + 1.0 : 0.0;
    // root-free stretches (a one-signed tail, say) can span a large fraction
    // of the interval; cap the panel length at a few oscillation wavelengths
    // so one Gauss rule per panel suffices
    const double max_len =
        std::max(32.0 * M_PI / std::max(opt.osc_degree, 1), M_PI / 64.0);
    std::vector<BreakPoint> refined;
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
      refined.push_back(breaks[i]);
      const double l = breaks[i].theta, r = breaks[i + 1].theta;
      const int pieces = static_cast<int>(std::ceil((r - l) / max_len));
      for (int j = 1; j < pieces; ++j) {
        refined.push_back({l + (r - l) * j / pieces, false});
      }
    }
    refined.push_back(breaks.back());
    double prev = split_pass(g, p, pr, refined, end_exponent, 16);
    for (int order = 32; order <= 256; order *= 2) {
      const double cur = split_pass(g, p, pr, refined, end_exponent, order);
      if (std::abs(cur - prev) <= tol * std::abs(cur)) {
        return std::pow(cur, 1.0 / p);
      }
      prev = cur;
    }
    throw std::runtime_error("weighted_norm_1d: split quadrature failed to converge");
  }

  Eigen::ArrayXd xg, wg;
  gauss_legendre(opt.gauss_order, xg, wg);
  int K = std::max(1, opt.panels_per_osc * std::max(1, opt.osc_degree));
  double prev = composite_pass(g, p, pr, K, xg, wg);
  for (int d = 0; d < opt.max_doublings; ++d) {
    K *= 2;
    const double cur = composite_pass(g, p, pr, K, xg, wg);
    if (std::abs(cur - prev) <= tol * std::abs(cur)) {
      return std::pow(cur, 1.0 / p);
    }
    prev = cur;
  }
  throw std::runtime_error("weighted_norm_1d: panel doubling failed to converge");
}

}  // namespace zonal
