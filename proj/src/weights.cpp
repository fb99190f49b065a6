#include "zonal/weights.hpp"

#include "zonal/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace zonal {

namespace {

double clamp1(double t) { return std::min(1.0, std::max(-1.0, t)); }

// pow with fast paths for the small exponents weight factors actually use
double powe(double b, double e) {
  if (e == 1.0) return b;
  if (e == 2.0) return b * b;
  if (e == 3.0) return b * b * b;
  if (e == 4.0) {
    const double s = b * b;
    return s * s;
  }
  if (e == 0.5) return std::sqrt(b);
  if (e == 0.0) return 1.0;
  return std::pow(b, e);
}

struct Frame {
  SpherePoint u, v, c;  // orthonormal, c the cap center
};

Frame frame_at(const SpherePoint& c) {
  SpherePoint seed = std::abs(c.z()) < 0.9 ? SpherePoint(SpherePoint::UnitZ())
                                           : SpherePoint(SpherePoint::UnitX());
  SpherePoint u = (seed - seed.dot(c) * c).normalized();
  return Frame{u, c.cross(u), c};
}

const std::pair<Eigen::ArrayXd, Eigen::ArrayXd>& cached_gl(int order) {
  static std::map<int, std::pair<Eigen::ArrayXd, Eigen::ArrayXd>> cache;
  auto it = cache.find(order);
  if (it == cache.end()) {
    Eigen::ArrayXd x, w;
    gauss_legendre(order, x, w);
    it = cache.emplace(order, std::make_pair(std::move(x), std::move(w))).first;
  }
  return it->second;
}

const std::pair<Eigen::ArrayXd, Eigen::ArrayXd>& cached_gj(double a, double b,
                                                           int order) {
  static std::map<std::tuple<double, double, int>,
                  std::pair<Eigen::ArrayXd, Eigen::ArrayXd>>
      cache;
  auto key = std::make_tuple(a, b, order);
  auto it = cache.find(key);
  if (it == cache.end()) {
    Eigen::ArrayXd x, w;
    gauss_jacobi(a, b, order, x, w);
    it = cache.emplace(key, std::make_pair(std::move(x), std::move(w))).first;
  }
  return it->second;
}

[[noreturn]] void ladder_failure() {
  throw std::runtime_error("cap quadrature failed to converge");
}

// ---- azimuth integrals at fixed polar offset from the cap center ----------

// One coordinate restricted to the offset circle: C + R cos(phi - psi),
// entering the weight with exponent e.
struct Factor {
  double C, R, psi, e;
};

std::vector<Factor> azimuth_factors(const Eigen::Vector3d& exps,
                                    const Frame& fr, double theta) {
  const double ct = std::cos(theta), st = std::sin(theta);
  std::vector<Factor> facs;
  for (int j = 0; j < 3; ++j) {
    if (exps[j] <= 0.0) continue;
    const double A = st * fr.u[j], B = st * fr.v[j];
    facs.push_back({ct * fr.c[j], std::hypot(A, B), std::atan2(B, A), exps[j]});
  }
  return facs;
}

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  return a < 0.0 ? a + 2.0 * M_PI : a;
}

struct Root {
  double angle, e;
};

std::vector<Root> merged_roots(const std::vector<Factor>& facs) {
  std::vector<Root> roots;
  for (const Factor& f : facs) {
    if (f.R <= 0.0 || std::abs(f.C) > f.R) continue;
    const double delta = std::acos(clamp1(-f.C / f.R));
    roots.push_back({wrap_angle(f.psi + delta), f.e});
    roots.push_back({wrap_angle(f.psi - delta), f.e});
  }
  std::sort(roots.begin(), roots.end(),
            [](const Root& a, const Root& b) { return a.angle < b.angle; });
  std::vector<Root> merged;
  for (const Root& r : roots) {
    if (!merged.empty() && r.angle - merged.back().angle < 1e-9)
      merged.back().e += r.e;  // coincident zeros vanish to a higher order
    else
      merged.push_back(r);
  }
  if (merged.size() > 1 &&
      merged.front().angle + 2.0 * M_PI - merged.back().angle < 1e-9) {
    merged.front().e += merged.back().e;
    merged.pop_back();
  }
  return merged;
}

double raw_product(const std::vector<Factor>& facs, double phi) {
  double v = 1.0;
  for (const Factor& f : facs)
    v *= powe(std::abs(f.C + f.R * std::cos(phi - f.psi)), f.e);
  return v;
}

double azimuth_smooth(const std::vector<Factor>& facs, double tol) {
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int nn = 16; nn <= 2048; nn *= 2) {
    double s = 0.0;
    const double h = 2.0 * M_PI / nn;
    for (int i = 0; i < nn; ++i) s += raw_product(facs, h * i);
    s *= h;
    if (std::isfinite(prev) &&
        std::abs(s - prev) <= tol * std::max(std::abs(s), 1e-300))
      return s;
    prev = s;
  }
  ladder_failure();
}

// Integral over [lo, hi] with the integrand vanishing like (phi-lo)^{e_lo}
// and (hi-phi)^{e_hi}; Gauss-Jacobi absorbs the endpoint powers and the
// ratio of the full product to the absorbed powers stays bounded.
double azimuth_segment(const std::vector<Factor>& facs, double lo, double hi,
                       double e_lo, double e_hi, double tol) {
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  if (half <= 0.0) return 0.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  double last = 0.0, change = std::numeric_limits<double>::infinity();
  for (int order : {6, 12, 24, 48, 96}) {
    const auto& rule = cached_gj(e_hi, e_lo, order);  // (1-x) end maps to hi
    double s = 0.0;
    for (Eigen::Index k = 0; k < rule.first.size(); ++k) {
      const double x = rule.first[k];
      const double phi = mid + half * x;
      double num = 1.0;
      for (const Factor& f : facs)
        num *= powe(std::abs(f.C + f.R * std::cos(phi - f.psi)), f.e);
      s += rule.second[k] * num / (powe(1.0 + x, e_lo) * powe(1.0 - x, e_hi));
    }
    s *= half;
    last = s;
    if (std::isfinite(prev)) {
      change = std::abs(s - prev);
      if (change <= tol * std::max(std::abs(s), 1e-300)) return s;
    }
    prev = s;
  }
  if (change <= std::max(100.0 * tol, 1e-7) * std::max(std::abs(last), 1e-300))
    return last;
  ladder_failure();
}

// Full-circle integral of prod |C_j + R_j cos(phi - psi_j)|^{e_j}.
double azimuth_value(const std::vector<Factor>& facs, double tol) {
  if (facs.empty()) return 2.0 * M_PI;
  const std::vector<Root> roots = merged_roots(facs);
  if (roots.empty()) return azimuth_smooth(facs, tol);
  const std::size_t nseg = roots.size();
  double total = 0.0;
  for (std::size_t i = 0; i < nseg; ++i) {
    const Root& a = roots[i];
    const Root& b = roots[(i + 1) % nseg];
    const double hi = (i + 1 < nseg) ? b.angle : b.angle + 2.0 * M_PI;
    total += azimuth_segment(facs, a.angle, hi, a.e, b.e, tol);
  }
  return total;
}

// ---- polar direction ------------------------------------------------------

// Panel edges where the offset circles become tangent to the coordinate
// great circles; the azimuth root structure changes there.
std::vector<double> polar_breaks(const Eigen::Vector3d& exps, const Frame& fr,
                                 double radius) {
  std::vector<double> seg{0.0};
  for (int j = 0; j < 3; ++j) {
    if (exps[j] <= 0.0) continue;
    const double s = std::abs(fr.c[j]);
    if (s >= 1.0) continue;
    for (double t : {std::asin(s), M_PI - std::asin(s)})
      if (t > 1e-14 && t < radius - 1e-14) seg.push_back(t);
  }
  seg.push_back(radius);
  std::sort(seg.begin(), seg.end());
  seg.erase(std::unique(seg.begin(), seg.end(),
                        [](double a, double b) { return b - a < 1e-12; }),
            seg.end());
  return seg;
}

template <typename F>
double polar_ladder(const F& integrand, double lo, double hi, double tol) {
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int order : {6, 12, 24, 48, 96, 192, 384}) {
    const auto& rule = cached_gl(order);
    double s = 0.0;
    for (Eigen::Index k = 0; k < rule.first.size(); ++k)
      s += rule.second[k] * integrand(mid + half * rule.first[k]);
    s *= half;
    if (std::isfinite(prev) &&
        std::abs(s - prev) <= tol * std::max(std::abs(s), 1e-300))
      return s;
    prev = s;
  }
  ladder_failure();
}

double power_cap_integral(const Weight& w, const Frame& fr, double radius,
                          double tol) {
  const Eigen::Vector3d exps = w.exponents;
  const double az_tol = std::max(0.1 * tol, 1e-10);
  const std::vector<double> seg = polar_breaks(exps, fr, radius);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < seg.size(); ++i)
    total += polar_ladder(
        [&](double th) {
          return std::sin(th) *
                 azimuth_value(azimuth_factors(exps, fr, th), az_tol);
        },
        seg[i], seg[i + 1], tol);
  return total * w.normalizer;
}

double custom_cap_integral(const Weight& w, const Frame& fr, double radius,
                           double tol) {
  const double az_tol = std::max(0.1 * tol, 1e-10);
  auto az = [&](double theta) {
    const double ct = std::cos(theta), st = std::sin(theta);
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int nn = 16; nn <= 4096; nn *= 2) {
      double s = 0.0;
      const double h = 2.0 * M_PI / nn;
      for (int i = 0; i < nn; ++i) {
        const double phi = h * i;
        s += w.raw(ct * fr.c +
                   st * (std::cos(phi) * fr.u + std::sin(phi) * fr.v));
      }
      s *= h;
      if (std::isfinite(prev) &&
          std::abs(s - prev) <= az_tol * std::max(std::abs(s), 1e-300))
        return s;
      prev = s;
    }
    ladder_failure();
  };
  return w.normalizer *
         polar_ladder([&](double th) { return std::sin(th) * az(th); }, 0.0,
                      radius, tol);
}

double cap_integral_tol(const Weight& w, const SpherePoint& center,
                        double radius, double tol) {
  if (std::abs(center.norm() - 1.0) > 1e-10)
    throw std::invalid_argument(
        "cap_weight_integral: center must be a unit vector");
  if (!(radius > 0.0) || radius > M_PI + 1e-12)
    throw std::invalid_argument(
        "cap_weight_integral: radius must lie in (0, pi]");
  radius = std::min(radius, M_PI);
  if (w.kind == WeightKind::unit)
    return w.normalizer * 2.0 * M_PI * (1.0 - std::cos(radius));
  const Frame fr = frame_at(center);
  return w.kind == WeightKind::power ? power_cap_integral(w, fr, radius, tol)
                                     : custom_cap_integral(w, fr, radius, tol);
}

const std::vector<SpherePoint>& probe_centers() {
  static const std::vector<SpherePoint> centers = [] {
    std::vector<SpherePoint> cs;
    for (int j = 0; j < 3; ++j)
      for (double s : {1.0, -1.0}) {
        SpherePoint p = SpherePoint::Zero();
        p[j] = s;
        cs.push_back(p);
      }
    const double d3 = 1.0 / std::sqrt(3.0);
    for (double sx : {1.0, -1.0})
      for (double sy : {1.0, -1.0})
        for (double sz : {1.0, -1.0})
          cs.emplace_back(sx * d3, sy * d3, sz * d3);
    const double d2 = 1.0 / std::sqrt(2.0);
    for (int a = 0; a < 3; ++a)
      for (double sa : {1.0, -1.0})
        for (double sb : {1.0, -1.0}) {
          SpherePoint p = SpherePoint::Zero();
          p[a] = sa * d2;
          p[(a + 1) % 3] = sb * d2;
          cs.push_back(p);
        }
    return cs;
  }();
  return centers;
}

double doubling_scan(const Weight& w) {
  double worst = 1.0;
  for (const SpherePoint& c : probe_centers())
    for (int k = 1; k <= 6; ++k) {
      const double r = M_PI / std::pow(2.0, k + 1);
      const double small = cap_integral_tol(w, c, r, 1e-7);
      const double big = cap_integral_tol(w, c, 2.0 * r, 1e-7);
      if (small > 0.0) worst = std::max(worst, big / small);
    }
  return worst;
}

}  // namespace

double Weight::operator()(const SpherePoint& x) const {
  switch (kind) {
    case WeightKind::unit:
      return normalizer;
    case WeightKind::power: {
      double v = normalizer;
      for (int j = 0; j < 3; ++j)
        if (exponents[j] > 0.0) v *= std::pow(std::abs(x[j]), exponents[j]);
      return v;
    }
    case WeightKind::custom:
      return normalizer * raw(x);
  }
  throw std::logic_error("weight: bad kind");
}

Weight make_unit_weight() { return Weight{}; }

double power_weight_mass(const Eigen::Vector3d& exponents) {
  double num = 2.0, sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    num *= std::tgamma(0.5 * (exponents[j] + 1.0));
    sum += exponents[j];
  }
  return num / std::tgamma(0.5 * (sum + 3.0));
}

Weight make_power_weight(const Eigen::Vector3d& exponents) {
  for (int j = 0; j < 3; ++j)
    if (!(exponents[j] >= 0.0) || !std::isfinite(exponents[j]))
      throw std::invalid_argument(
          "make_power_weight: exponents must be finite and nonnegative");
  Weight w;
  w.kind = WeightKind::power;
  w.exponents = exponents;
  w.normalizer = 1.0 / power_weight_mass(exponents);
  w.s_w = 2.0 + exponents.sum() - exponents.minCoeff();
  std::ostringstream os;
  os << "power:" << exponents[0] << "," << exponents[1] << "," << exponents[2];
  w.label = os.str();
  if (exponents.maxCoeff() == 0.0) {
    w.kind = WeightKind::unit;
    w.label = "unit";
    w.doubling_constant_estimate = 4.0;
  } else {
    w.doubling_constant_estimate = doubling_scan(w);
  }
  return w;
}

Weight make_custom_weight(std::function<double(const SpherePoint&)> raw,
                          const std::string& label) {
  if (!raw) throw std::invalid_argument("make_custom_weight: empty evaluator");
  Weight w;
  w.kind = WeightKind::custom;
  w.raw = std::move(raw);
  w.normalizer = 1.0;
  w.label = label;

  const SphereGrid grid = build_grid(128, 2);
  const GridSamples vals = sample_weight(w, grid);
  if (vals.minCoeff() <= 0.0)
    throw std::invalid_argument(
        "make_custom_weight: evaluator must be positive");
  w.normalizer = 1.0 / grid_integral(grid, vals);

  // sup of dyadic cap-growth logs plus a small margin
  double s_est = 0.0, worst = 1.0;
  for (const SpherePoint& c : probe_centers())
    for (int k = 3; k <= 5; ++k) {
      const double r = M_PI / std::pow(2.0, k + 1);
      const double base = cap_integral_tol(w, c, r, 1e-7);
      for (int m = 1; m <= 3; ++m) {
        const double big =
            cap_integral_tol(w, c, std::pow(2.0, m) * r, 1e-7);
        if (base > 0.0) {
          s_est = std::max(s_est, std::log2(big / base) / m);
          if (m == 1) worst = std::max(worst, big / base);
        }
      }
    }
  w.s_w = s_est + 0.01;
  w.doubling_constant_estimate = worst;
  return w;
}

Weight parse_weight(const std::string& spec) {
  if (spec == "unit") return make_unit_weight();
  const std::string prefix = "power:";
  if (spec.rfind(prefix, 0) == 0) {
    std::istringstream is(spec.substr(prefix.size()));
    Eigen::Vector3d a;
    char c1 = 0, c2 = 0;
    if (!(is >> a[0] >> c1 >> a[1] >> c2 >> a[2]) || c1 != ',' || c2 != ',' ||
        !(is >> std::ws).eof())
      throw std::invalid_argument("parse_weight: bad power exponent list");
    return make_power_weight(a);
  }
  throw std::invalid_argument("parse_weight: unknown weight spec '" + spec +
                              "'");
}

double cap_weight_integral(const Weight& w, const SpherePoint& center,
                           double radius) {
  return cap_integral_tol(w, center, radius, 1e-9);
}

double mollified_value(const Weight& w, int n, const SpherePoint& x) {
  if (n < 1) throw std::invalid_argument("mollified_value: n must be >= 1");
  // inner cap integrals run at a looser (still sub-1e-6) tolerance: the
  // mollified values feed band estimates, not identity checks
  return static_cast<double>(n) * n * cap_integral_tol(w, x, 1.0 / n, 1e-7);
}

MollifiedWeight mollify(const Weight& w, int n, const SphereGrid& grid) {
  if (n < 1) throw std::invalid_argument("mollify: n must be >= 1");
  MollifiedWeight wn;
  wn.base = w;
  wn.n = n;
  wn.grid = grid;
  wn.values.resize(grid.rows(), grid.n_phi);
  if (w.kind == WeightKind::unit) {
    const double c =
        0.5 * static_cast<double>(n) * n * (1.0 - std::cos(1.0 / n));
    wn.values.setConstant(c);
    return wn;
  }
  for (Eigen::Index i = 0; i < grid.rows(); ++i)
    for (int j = 0; j < grid.n_phi; ++j)
      wn.values(i, j) = mollified_value(w, n, grid.node(i, j));
  if (!(wn.values.minCoeff() > 0.0))
    throw std::runtime_error("mollify: nonpositive mollified value");
  return wn;
}

GridSamples sample_weight(const Weight& w, const SphereGrid& grid) {
  GridSamples out(grid.rows(), grid.n_phi);
  for (Eigen::Index i = 0; i < grid.rows(); ++i)
    for (int j = 0; j < grid.n_phi; ++j) out(i, j) = w(grid.node(i, j));
  return out;
}

namespace {

double weighted_norm_impl(const GridSamples& f, double p,
                          const GridSamples& wvals, const SphereGrid& grid) {
  if (f.rows() != grid.rows() || f.cols() != grid.n_phi)
    throw std::invalid_argument("weighted_lp_norm: sample shape mismatch");
  if (std::isinf(p)) return f.array().abs().maxCoeff();
  if (!(p > 0.0))
    throw std::invalid_argument("weighted_lp_norm: p must be positive");
  Eigen::ArrayXXd a = f.array().abs();
  if (p == 2.0)
    a = a.square();
  else if (p != 1.0)
    a = a.pow(p);
  a *= wvals.array();
  const double integral =
      (a.rowwise().sum() * grid.polar_weight).sum() * 2.0 * M_PI / grid.n_phi;
  return std::pow(std::max(integral, 0.0), 1.0 / p);
}

}  // namespace

double weighted_lp_norm(const GridSamples& f, double p, const Weight& w,
                        const SphereGrid& grid) {
  return weighted_norm_impl(f, p, sample_weight(w, grid), grid);
}

double weighted_lp_norm(const GridSamples& f, double p,
                        const MollifiedWeight& wn) {
  return weighted_norm_impl(f, p, wn.values, wn.grid);
}

GridSamples maximal_function(const GridSamples& f, int n, double xi,
                             const SphereGrid& grid) {
  if (n < 1) throw std::invalid_argument("maximal_function: n must be >= 1");
  if (!(xi > 0.0))
    throw std::invalid_argument("maximal_function: xi must be positive");
  const Eigen::Index m = grid.rows();
  const int nphi = grid.n_phi;
  if (f.rows() != m || f.cols() != nphi)
    throw std::invalid_argument("maximal_function: sample shape mismatch");

  const Eigen::ArrayXXd absf = f.array().abs();
  const Eigen::ArrayXd rowmax = absf.rowwise().maxCoeff();
  const double gmax = rowmax.maxCoeff();
  const Eigen::ArrayXd ct = grid.theta.cos(), st = grid.theta.sin();
  Eigen::ArrayXd cosdphi(nphi);
  for (int k = 0; k < nphi; ++k) cosdphi[k] = std::cos(2.0 * M_PI * k / nphi);

  // (1 + n|dtheta|)^{-xi} bounds the decay factor row against row, since the
  // geodesic distance between their nodes is at least the polar gap
  Eigen::ArrayXXd rowbound(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index i2 = 0; i2 < m; ++i2)
      rowbound(i, i2) =
          std::pow(1.0 + n * std::abs(grid.theta[i] - grid.theta[i2]), -xi);

  GridSamples out(m, nphi);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (int j = 0; j < nphi; ++j) {
      double best = absf(i, j);
      // visit rows nearest the target first so the running max prunes hard
      for (Eigen::Index d = 0; d < m; ++d) {
        double reach = 0.0;
        for (int sgn : {-1, 1}) {
          if (d == 0 && sgn > 0) break;
          const Eigen::Index i2 = i + sgn * d;
          if (i2 < 0 || i2 >= m) continue;
          const double rb = rowbound(i, i2);
          reach = std::max(reach, rb);
          if (rowmax[i2] * rb <= best) continue;
          for (int j2 = 0; j2 < nphi; ++j2) {
            const double v = absf(i2, j2);
            if (v * rb <= best) continue;
            const double dot =
                ct[i] * ct[i2] +
                st[i] * st[i2] * cosdphi[(j2 - j + nphi) % nphi];
            const double cand =
                v * std::pow(1.0 + n * std::acos(clamp1(dot)), -xi);
            if (cand > best) best = cand;
          }
        }
        if (d > 0 && gmax * reach <= best) break;
      }
      out(i, j) = best;
    }
  }
  return out;
}

std::vector<Cap> degeneracy_cap_family(int radii_per_center) {
  if (radii_per_center < 1)
    throw std::invalid_argument(
        "degeneracy_cap_family: need at least one radius");
  std::vector<Cap> caps;
  for (int j = 0; j < 3; ++j)
    for (double s : {1.0, -1.0}) {
      SpherePoint c = SpherePoint::Zero();
      c[j] = s;
      for (int i = 0; i < radii_per_center; ++i)
        caps.push_back({c, std::pow(2.0, -i)});
    }
  return caps;
}

namespace {

// Mesh on [a, b] refining dyadically toward both ends, floor width delta.
std::vector<double> graded_edges(double a, double b, double delta) {
  const double mid = 0.5 * (a + b);
  std::vector<double> xs{a, mid, b};
  for (double x = delta; a + x < mid; x *= 2.0) {
    xs.push_back(a + x);
    xs.push_back(b - x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [&](double p, double q) {
                         return std::abs(q - p) < 0.25 * delta;
                       }),
           xs.end());
  xs.front() = a;
  xs.back() = b;
  return xs;
}

std::vector<double> dyadic_polar_edges(double radius, double floor_w) {
  std::vector<double> e{radius};
  double cur = radius;
  while (cur > floor_w && e.size() < 26) {
    cur *= 0.5;
    e.push_back(cur);
  }
  e.push_back(0.0);
  std::reverse(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  return e;
}

}  // namespace

std::vector<CapBalance> ap_cap_data(const Weight& w, double p, int n,
                                    const std::vector<Cap>& caps) {
  if (!(p >= 1.0)) throw std::invalid_argument("ap_cap_data: p must be >= 1");
  if (n < 1) throw std::invalid_argument("ap_cap_data: n must be >= 1");
  if (caps.empty()) throw std::invalid_argument("ap_cap_data: empty cap family");

  std::vector<CapBalance> out;
  out.reserve(caps.size());

  if (w.kind == WeightKind::unit) {
    const double c =
        0.5 * static_cast<double>(n) * n * (1.0 - std::cos(1.0 / n));
    for (const Cap& cap : caps) {
      CapBalance cb;
      cb.radius = cap.radius;
      cb.area = cap_measure(cap.radius, 3);
      cb.wn_mass = c * cb.area;
      cb.balance = 1.0 / c;
      out.push_back(cb);
    }
    return out;
  }

  const auto& pol = cached_gl(6);
  const auto& azr = cached_gl(3);
  const double dual_exp = (p > 1.0) ? -1.0 / (p - 1.0) : 0.0;

  for (const Cap& cap : caps) {
    if (!(cap.radius > 0.0) || cap.radius > M_PI)
      throw std::invalid_argument("ap_cap_data: cap radius must lie in (0, pi]");
    const Frame fr = frame_at(cap.center);
    // polar panels refine dyadically toward the center and azimuth panels
    // toward the zero meridians: the dual power of the mollified weight
    // concentrates within ~1/n of the degenerate set
    const std::vector<double> pedges =
        dyadic_polar_edges(cap.radius, 1.0 / n);
    double mass = 0.0, dual = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t pi = 0; pi + 1 < pedges.size(); ++pi) {
      const double ph = 0.5 * (pedges[pi + 1] - pedges[pi]);
      const double pm = 0.5 * (pedges[pi + 1] + pedges[pi]);
      for (Eigen::Index kt = 0; kt < pol.first.size(); ++kt) {
        const double th = pm + ph * pol.first[kt];
        const double st = std::sin(th);
        const double qth = pol.second[kt] * ph * st;

        std::vector<std::pair<double, double>> phi_panels;
        const std::vector<Factor> facs =
            w.kind == WeightKind::power
                ? azimuth_factors(w.exponents, fr, th)
                : std::vector<Factor>{};
        std::vector<double> roots;
        for (const Root& r : merged_roots(facs)) roots.push_back(r.angle);
        if (roots.empty()) {
          const int np = 8;
          for (int i = 0; i < np; ++i)
            phi_panels.emplace_back(2.0 * M_PI * i / np,
                                    2.0 * M_PI * (i + 1) / np);
        } else {
          for (std::size_t i = 0; i < roots.size(); ++i) {
            const double a = roots[i];
            const double b = (i + 1 < roots.size()) ? roots[i + 1]
                                                    : roots[0] + 2.0 * M_PI;
            const double seg = b - a;
            if (seg <= 0.0) continue;
            const double delta = std::min(
                0.35 * seg, 2.0 / (n * std::max(st, 1.0 / n)));
            const std::vector<double> ge = graded_edges(a, b, delta);
            for (std::size_t q = 0; q + 1 < ge.size(); ++q)
              phi_panels.emplace_back(ge[q], ge[q + 1]);
          }
        }

        for (const auto& [pa, pb] : phi_panels) {
          const double ah = 0.5 * (pb - pa), am = 0.5 * (pb + pa);
          for (Eigen::Index ka = 0; ka < azr.first.size(); ++ka) {
            const double phi = am + ah * azr.first[ka];
            const SpherePoint y =
                std::cos(th) * fr.c +
                st * (std::cos(phi) * fr.u + std::sin(phi) * fr.v);
            const double wn = mollified_value(w, n, y);
            const double q = qth * azr.second[ka] * ah;
            mass += q * wn;
            lo = std::min(lo, wn);
            if (p > 1.0) dual += q * std::pow(wn, dual_exp);
          }
        }
      }
    }
    CapBalance cb;
    cb.radius = cap.radius;
    cb.area = cap_measure(cap.radius, 3);
    cb.wn_mass = mass;
    cb.balance = (p > 1.0) ? std::pow(dual / cb.area, p - 1.0) : 1.0 / lo;
    out.push_back(cb);
  }
  return out;
}

double ap_tau_from_data(const std::vector<CapBalance>& data, double p, double r,
                        int n) {
  if (data.empty()) throw std::invalid_argument("ap_tau_from_data: no cap data");
  if (!(p >= 1.0))
    throw std::invalid_argument("ap_tau_from_data: p must be >= 1");
  double best = 0.0;
  for (const CapBalance& cb : data)
    best = std::max(best, (cb.wn_mass / cb.area) * cb.balance *
                              std::pow(1.0 + n * std::sqrt(cb.area), -r * p));
  return best;
}

double ap_tau_quantity(const Weight& w, double p, double r, int n,
                       const std::vector<Cap>& caps) {
  return ap_tau_from_data(ap_cap_data(w, p, n, caps), p, r, n);
}

double power_tau(const Weight& w, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("power_tau: p must be positive");
  return w.s_w / p - 2.0;
}

}  // namespace zonal
