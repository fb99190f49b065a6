#include "zonal/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace zonal {

namespace {

double glue(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

}  // namespace

double eta_eval(double x) {
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  const double up = glue(2.0 - x);
  return up / (up + glue(x - 1.0));
}

Eigen::ArrayXd eta_eval(const Eigen::ArrayXd& x) {
  return x.unaryExpr([](double v) { return eta_eval(v); });
}

double psi_eval(double x) { return eta_eval(x / 2.0) - eta_eval(x); }

double cutoff_eval(CutoffKind kind, double x) {
  return kind == CutoffKind::eta ? eta_eval(x) : psi_eval(x);
}

double eval_zonal(const ZonalKernel& kern, double t) {
  Eigen::VectorXd w(kern.coeff.size());
  for (int k = 0; k <= kern.degree(); ++k) {
    w[k] = kern.coeff[k] * kernel_norm_factor(kern.params, k);
  }
  return jacobi_series(kern.params, w, t);
}

Eigen::ArrayXd eval_zonal(const ZonalKernel& kern, const Eigen::ArrayXd& t) {
  Eigen::VectorXd w(kern.coeff.size());
  for (int k = 0; k <= kern.degree(); ++k) {
    w[k] = kern.coeff[k] * kernel_norm_factor(kern.params, k);
  }
  return jacobi_series(kern.params, w, t);
}

ZonalKernel build_G(const JacobiParams& pr, int n, double r) {
  if (n < 1) throw std::invalid_argument("build_G: need n >= 1");
  const double s1 = pr.sum() + 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * n + 1);
  for (int k = 0; k <= 2 * n; ++k) {
    const double symbol =
        (r == 0.0) ? 1.0 : std::pow(k * (k + s1), r / 2.0);
    c[k] = eta_eval(static_cast<double>(k) / n) * symbol;
  }
  ZonalKernel kern{pr, std::move(c), "G(n=" + std::to_string(n) + ",r=" + std::to_string(r) + ")"};
  return kern;
}

ZonalKernel build_K_raw(int d, int n) {
  if (d < 3) throw std::invalid_argument("build_K: need d >= 3");
  const double a = (d - 3) / 2.0;
  JacobiParams pr(a, a);
  Eigen::VectorXd c(2 * n + 1);
  for (int k = 0; k <= 2 * n; ++k) c[k] = eta_eval(static_cast<double>(k) / n);
  return ZonalKernel{pr, std::move(c), "Kraw(d=" + std::to_string(d) + ",n=" + std::to_string(n) + ")"};
}

ZonalKernel build_K(int d, int n) {
  ZonalKernel kern = build_K_raw(d, n);
  // Total surface area |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2); the normalizer
  // pins the mean of the kernel against the surface measure to 1.
  const double area = 2.0 * std::pow(M_PI, d / 2.0) / std::exp(std::lgamma(d / 2.0));
  const double cd =
      std::exp(std::lgamma((d - 1) / 2.0) - std::lgamma(static_cast<double>(d - 1))) / area;
  kern.coeff *= cd;
  kern.label = "K(d=" + std::to_string(d) + ",n=" + std::to_string(n) + ")";
  return kern;
}

double cesaro_number(double delta, int k) {
  if (k < 0) throw std::invalid_argument("cesaro_number: negative index");
  return std::exp(std::lgamma(k + delta + 1.0) - std::lgamma(k + 1.0) -
                  std::lgamma(delta + 1.0));
}

ZonalKernel build_cesaro(const JacobiParams& pr, int n, double delta) {
  if (n < 0) throw std::invalid_argument("build_cesaro: negative degree");
  Eigen::VectorXd c(n + 1);
  const double an = cesaro_number(delta, n);
  for (int k = 0; k <= n; ++k) c[k] = cesaro_number(delta, n - k) / an;
  return ZonalKernel{pr, std::move(c),
                     "Cesaro(n=" + std::to_string(n) + ",delta=" + std::to_string(delta) + ")"};
}

double kernel_norm(const ZonalKernel& kern, double p, NormOptions opt) {
  if (opt.osc_degree <= 1) opt.osc_degree = std::max(1, kern.degree());
  const ZonalKernel* k = &kern;
  if (opt.split_zeros) {
    // for small p the deep tail carries real mass, so evaluate the series in
    // extended precision and tell the engine about the lower roundoff floor
    Eigen::VectorXd w(kern.coeff.size());
    for (int j = 0; j <= kern.degree(); ++j) {
      w[j] = kern.coeff[j] * kernel_norm_factor(kern.params, j);
    }
    if (opt.noise_floor <= 0.0) {
      opt.noise_floor =
          std::max(1e-16, 8.0 * 1.1e-19 * std::max(kern.degree(), 1));
    }
    const JacobiParams pr = kern.params;
    return weighted_norm_1d(
        [pr, w = std::move(w)](const Eigen::ArrayXd& t) {
          return jacobi_series_ext(pr, w, t);
        },
        p, kern.params, opt);
  }
  return weighted_norm_1d(
      [k](const Eigen::ArrayXd& t) { return eval_zonal(*k, t); }, p, kern.params, opt);
}

Eigen::VectorXd sbp_coefficients(const JacobiParams& pr, int n, double r, int j,
                                 int smax) {
  const double sig = pr.sum();
  Eigen::VectorXd a(smax + 1);
  for (int s = 0; s <= smax; ++s) {
    const double sym = (r == 0.0) ? 1.0 : std::pow(s * (s + sig + 1.0), r / 2.0);
    a[s] = (2.0 * s + sig + 1.0) * sym * eta_eval(static_cast<double>(s) / n);
  }
  for (int level = 0; level < j; ++level) {
    Eigen::VectorXd next(smax + 1);
    for (int s = 0; s <= smax; ++s) {
      const double lead = a[s] / (2.0 * s + sig + level + 1.0);
      const double shifted =
          (s + 1 <= smax) ? a[s + 1] / (2.0 * s + sig + level + 3.0) : 0.0;
      next[s] = lead - shifted;
    }
    a.swap(next);
  }
  return a;
}

double sbp_gamma(double r, int j) {
  if (j == 0) return 2.0;
  double prod = 1.0;
  for (int i = 0; i < j; ++i) prod *= (r - 2.0 * i);
  return std::pow(2.0, 1.0 - j) * ((j % 2 == 0) ? 1.0 : -1.0) * prod;
}

SbpRepresentation sbp_representation(const JacobiParams& pr, int n, double r) {
  const double s1 = pr.sum() + 1.0;
  const bool even_r = (r == std::floor(r)) && (static_cast<long long>(r) % 2 == 0);
  if (s1 > 0.0 && even_r && r > 0.0) {
    throw std::domain_error("sbp_representation: even integer r degenerates");
  }
  if (s1 == 0.0 && r == std::floor(r)) {
    throw std::domain_error("sbp_representation: integer r degenerates at alpha+beta=-1");
  }

  const double sig = pr.sum();
  const int ell = static_cast<int>(std::floor(sig + r + 2.0)) + 1;
  const int smax = 2 * n + ell + 2;
  const Eigen::VectorXd a = sbp_coefficients(pr, n, r, ell, smax);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * n + 1);
  for (int k = 0; k <= 2 * n; ++k) b[k] = a[k] / (2.0 * k + sig + ell + 1.0);

  SbpRepresentation rep;
  rep.ell = ell;
  rep.kernel = ZonalKernel{JacobiParams(pr.alpha + ell, pr.beta), std::move(b),
                           "sbp(n=" + std::to_string(n) + ",r=" + std::to_string(r) + ")"};

  // Fit the overall scale against the direct construction on a probe grid
  // away from the endpoints, and record the reconstruction error.
  const ZonalKernel g = build_G(pr, n, r);
  const int m = 400;
  Eigen::ArrayXd theta(m);
  for (int i = 0; i < m; ++i) theta[i] = 0.2 + (M_PI - 0.4) * i / (m - 1.0);
  const Eigen::ArrayXd t = theta.cos();
  const Eigen::ArrayXd target = eval_zonal(g, t);
  const Eigen::ArrayXd probe = eval_zonal(rep.kernel, t);
  const double denom = (probe * probe).sum();
  rep.fitted_scale = denom > 0.0 ? (probe * target).sum() / denom : 0.0;
  const double scale_ref = target.abs().maxCoeff();
  rep.max_rel_error =
      (rep.fitted_scale * probe - target).abs().maxCoeff() / scale_ref;
  return rep;
}

}  // namespace zonal
