#include "zonal/operators.hpp"

#include "zonal/fitting.hpp"
#include "zonal/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace zonal {

namespace {

void require_degree(const SHExpansion& f, const char* who) {
  if (f.max_degree < 0 || f.coeff.size() != (f.max_degree + 1) * (f.max_degree + 1))
    throw std::invalid_argument(std::string(who) + ": malformed expansion");
}

double laplace_multiplier(int k, double r) {
  if (r == 0.0) return 1.0;
  return std::pow(static_cast<double>(k) * (k + 1.0), 0.5 * r);
}

// ||f||_{p,w} from samples with the weight samples precomputed; p = inf is
// the plain grid maximum.
double sampled_norm(const GridSamples& f, const GridSamples& wsamp, double p,
                    const SphereGrid& grid) {
  if (std::isinf(p)) return f.array().abs().maxCoeff();
  Eigen::ArrayXXd a = f.array().abs();
  if (p == 2.0)
    a = a.square();
  else if (p != 1.0)
    a = a.pow(p);
  return std::pow(grid_integral(grid, (a * wsamp.array()).matrix()), 1.0 / p);
}

// Sphere L^p norm of a zonal kernel about any axis: the polar-measure norm
// from the sign-split 1-D engine times the area factor of the reduction to
// one variable; dense evaluation for the sup norm.
double zonal_sphere_norm(const ZonalKernel& kern, double p) {
  if (!std::isinf(p)) {
    NormOptions opt;
    // below p = 2 the sign changes of g leave |g|^p with limited smoothness;
    // the split engine absorbs those cusps into the panel rules
    opt.split_zeros = p < 2.0;
    return std::pow(4.0 * M_PI, 1.0 / p) * kernel_norm(kern, p, opt);
  }
  const int m = 8 * std::max(kern.degree(), 1) + 64;
  const Eigen::ArrayXd t =
      Eigen::ArrayXd::LinSpaced(m, 0.0, M_PI).cos();
  return eval_zonal(kern, t).abs().maxCoeff();
}

RegimePrediction classify(double p, double r, double threshold,
                          double log_power_at_critical, int ambient_d) {
  RegimePrediction out;
  out.critical_threshold = threshold;
  out.aq_index =
      std::max(p, (ambient_d - 1.0 + p * r) / (ambient_d - 1.0));
  const double half = 0.5 * r;
  const bool even = std::abs(half - std::round(half)) < 1e-9 && r > 0.5;
  if (even) {
    out.regime = RateRegime::even_integer;
    out.exponent = r;
    out.log_power = 0.0;
  } else if (r > threshold + 1e-9) {
    out.regime = RateRegime::supercritical;
    out.exponent = r;
    out.log_power = 0.0;
  } else if (r >= threshold - 1e-9) {
    out.regime = RateRegime::critical;
    out.exponent = r;
    out.log_power = log_power_at_critical;
  } else {
    out.regime = RateRegime::subcritical;
    out.exponent = threshold;
    out.log_power = 0.0;
  }
  return out;
}

void require_rate_args(double p, double r, const char* who) {
  if (!(p > 0.0) || std::isinf(p))
    throw std::invalid_argument(std::string(who) + ": need 0 < p < inf");
  if (!(r > 0.0))
    throw std::invalid_argument(std::string(who) + ": need r > 0");
}

}  // namespace

SHExpansion project(const SHExpansion& f, int k) {
  require_degree(f, "project");
  if (k < 0 || k > f.max_degree)
    throw std::invalid_argument("project: degree out of range");
  SHExpansion out = SHExpansion::zero(k);
  for (int m = -k; m <= k; ++m) out.at(k, m) = f.at(k, m);
  return out;
}

SHExpansion frac_laplace(const SHExpansion& f, double r) {
  require_degree(f, "frac_laplace");
  if (r < 0.0) throw std::invalid_argument("frac_laplace: need r >= 0");
  SHExpansion out = f;
  for (int l = 0; l <= f.max_degree; ++l) {
    const double mul = laplace_multiplier(l, r);
    for (int m = -l; m <= l; ++m) out.at(l, m) *= mul;
  }
  return out;
}

ZonalKernel frac_laplace(const ZonalKernel& kern, double r) {
  if (r < 0.0) throw std::invalid_argument("frac_laplace: need r >= 0");
  ZonalKernel out = kern;
  const double s1 = kern.params.sum() + 1.0;
  if (r != 0.0)
    for (int k = 0; k <= kern.degree(); ++k)
      out.coeff[k] *= std::pow(k * (k + s1), 0.5 * r);
  return out;
}

SHExpansion vallee_poussin(const SHExpansion& f, int n) {
  require_degree(f, "vallee_poussin");
  if (n < 1) throw std::invalid_argument("vallee_poussin: need n >= 1");
  const int out_degree = std::min(f.max_degree, 2 * n);
  SHExpansion out = SHExpansion::zero(out_degree);
  for (int l = 0; l <= out_degree; ++l) {
    const double mul = eta_eval(static_cast<double>(l) / n);
    if (mul == 0.0) continue;
    for (int m = -l; m <= l; ++m) out.at(l, m) = mul * f.at(l, m);
  }
  return out;
}

SHExpansion cesaro_mean(const SHExpansion& f, int n, double delta) {
  require_degree(f, "cesaro_mean");
  if (n < 0) throw std::invalid_argument("cesaro_mean: need n >= 0");
  if (!(delta > -1.0))
    throw std::invalid_argument("cesaro_mean: need delta > -1");
  const int out_degree = std::min(f.max_degree, n);
  SHExpansion out = SHExpansion::zero(out_degree);
  const double top = cesaro_number(delta, n);
  for (int l = 0; l <= out_degree; ++l) {
    const double mul = cesaro_number(delta, n - l) / top;
    for (int m = -l; m <= l; ++m) out.at(l, m) = mul * f.at(l, m);
  }
  return out;
}

ApproxBracket best_approx(const SHExpansion& f, int n, double p,
                          const SphereGrid& grid) {
  require_degree(f, "best_approx");
  if (n < 0) throw std::invalid_argument("best_approx: need n >= 0");
  if (!(p > 0.0)) throw std::invalid_argument("best_approx: need p > 0");

  if (p == 2.0) {
    double tail = 0.0;
    for (int l = n + 1; l <= f.max_degree; ++l)
      for (int m = -l; m <= l; ++m) tail += f.at(l, m) * f.at(l, m);
    const double e = std::sqrt(tail);
    return {e, e};
  }

  auto truncation_error = [&](int scale) {
    const SHExpansion g = vallee_poussin(f, scale);
    SHExpansion diff = f;
    for (int l = 0; l <= g.max_degree; ++l)
      for (int m = -l; m <= l; ++m) diff.at(l, m) -= g.at(l, m);
    return lp_norm_sphere(diff, p, grid);
  };
  auto partial_sum_error = [&](int deg) {
    SHExpansion diff = f;
    for (int l = 0; l <= std::min(deg, f.max_degree); ++l)
      for (int m = -l; m <= l; ++m) diff.at(l, m) = 0.0;
    return lp_norm_sphere(diff, p, grid);
  };

  if (n == 0) {
    const double e = partial_sum_error(0);
    return {e, e};
  }
  ApproxBracket out;
  out.lower = truncation_error(n);
  // the competitor behind the upper end must stay inside degree n: smooth
  // truncation at scale n/2 when that scale exists, the raw partial sum at
  // n = 1
  out.upper = (n >= 2) ? truncation_error(n / 2) : partial_sum_error(1);
  return out;
}

RegimePrediction predict_rate_unweighted(double p, double r, int d) {
  require_rate_args(p, r, "predict_rate_unweighted");
  if (d < 3)
    throw std::invalid_argument("predict_rate_unweighted: need d >= 3");
  return classify(p, r, (d - 1.0) * (1.0 / p - 1.0), 1.0 / p, d);
}

RegimePrediction predict_rate_jacobi(double p, double r, double alpha) {
  require_rate_args(p, r, "predict_rate_jacobi");
  if (!(alpha >= -0.5))
    throw std::invalid_argument("predict_rate_jacobi: need alpha >= -1/2");
  const int ambient_d = static_cast<int>(std::lround(2.0 * alpha + 3.0));
  return classify(p, r, (2.0 * alpha + 2.0) * (1.0 / p - 1.0), 1.0 / p,
                  std::max(ambient_d, 2));
}

RegimePrediction predict_rate_doubling(double p, double r, double s_w, int d) {
  require_rate_args(p, r, "predict_rate_doubling");
  if (d < 3) throw std::invalid_argument("predict_rate_doubling: need d >= 3");
  if (!(s_w >= 0.0))
    throw std::invalid_argument("predict_rate_doubling: need s_w >= 0");
  const double threshold =
      (p <= 1.0) ? s_w / p - (d - 1.0) : (s_w - (d - 1.0)) / p;
  return classify(p, r, threshold, std::max(1.0 / p, 1.0), d);
}

SweepResult bernstein_sweep(Ensemble ensemble, double p, double r,
                            const Weight& w, const std::vector<int>& n_list,
                            const SweepOptions& opt) {
  if (!(p > 0.0)) throw std::invalid_argument("bernstein_sweep: need p > 0");
  if (!(r >= 0.0)) throw std::invalid_argument("bernstein_sweep: need r >= 0");
  if (n_list.size() < 2)
    throw std::invalid_argument("bernstein_sweep: need at least two scales");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1)
      throw std::invalid_argument("bernstein_sweep: scales must be >= 1");
    if (i > 0 && n_list[i] != 2 * n_list[i - 1])
      throw std::invalid_argument("bernstein_sweep: scale list must be dyadic");
  }
  if (opt.draws < 1 || opt.oversample < 1)
    throw std::invalid_argument("bernstein_sweep: bad ensemble options");

  const JacobiParams pr(0.0, 0.0);
  const SpherePoint degenerate_probe = SpherePoint::UnitZ();
  const SpherePoint generic_probe = SpherePoint(1.0, 1.0, 1.0).normalized();

  SweepResult out;
  out.rows.reserve(n_list.size());
  for (const int n : n_list) {
    double best = 0.0;
    if (ensemble == Ensemble::zonal_extremal) {
      const ZonalKernel base = build_G(pr, n, 0.0);
      const ZonalKernel frac = build_G(pr, n, r);
      if (w.kind == WeightKind::unit) {
        best = zonal_sphere_norm(frac, p) / zonal_sphere_norm(base, p);
      } else {
        const SphereGrid grid = build_grid(4 * n, opt.oversample);
        const GridSamples wsamp = sample_weight(w, grid);
        for (const SpherePoint& axis : {degenerate_probe, generic_probe}) {
          const double den =
              sampled_norm(sample_zonal(grid, base, axis), wsamp, p, grid);
          const double num =
              sampled_norm(sample_zonal(grid, frac, axis), wsamp, p, grid);
          best = std::max(best, num / den);
        }
      }
    } else {
      const SphereGrid grid = build_grid(2 * n, opt.oversample);
      const GridSamples wsamp = sample_weight(w, grid);
      Rng rng(opt.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(n)));
      for (int draw = 0; draw < opt.draws; ++draw) {
        SHExpansion f = SHExpansion::zero(n);
        for (Eigen::Index i = 0; i < f.coeff.size(); ++i)
          f.coeff[i] = rng.normal();
        const double den =
            sampled_norm(inverse_sh(grid, f), wsamp, p, grid);
        const double num = sampled_norm(
            inverse_sh(grid, frac_laplace(f, r)), wsamp, p, grid);
        best = std::max(best, num / den);
      }
    }
    out.rows.push_back({n, best});
  }

  std::vector<double> xs, ys;
  for (const SweepRow& row : out.rows) {
    xs.push_back(static_cast<double>(row.n));
    ys.push_back(row.max_ratio);
  }
  out.fitted_slope = fit_loglog_slope_tophalf(xs, ys);
  return out;
}

}  // namespace zonal
