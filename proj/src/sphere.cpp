#include "zonal/sphere.hpp"

#include "zonal/rng.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace zonal {

namespace {

double clamp1(double v) { return std::min(1.0, std::max(-1.0, v)); }

void require_unit(const SpherePoint& x, const char* who) {
  if (!is_unit(x)) throw std::invalid_argument(std::string(who) + ": point is not unit-norm");
}

}  // namespace

bool is_unit(const SpherePoint& x, double tol) {
  return std::abs(x.norm() - 1.0) <= tol;
}

double geodesic(const SpherePoint& x, const SpherePoint& y) {
  require_unit(x, "geodesic");
  require_unit(y, "geodesic");
  return std::acos(clamp1(x.dot(y)));
}

double sphere_area(int d) {
  if (d < 1) throw std::invalid_argument("sphere_area: dimension must be >= 1");
  if (d == 1) return 2.0;
  return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

double cap_measure(double radius, int d) {
  if (!(radius > 0.0) || radius > M_PI + 1e-12)
    throw std::invalid_argument("cap_measure: radius must lie in (0, pi]");
  if (d < 2) throw std::invalid_argument("cap_measure: dimension must be >= 2");
  radius = std::min(radius, M_PI);
  if (d == 3) return 2.0 * M_PI * (1.0 - std::cos(radius));
  static Eigen::ArrayXd gx, gw;
  if (gx.size() == 0) gauss_legendre(64, gx, gw);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < gx.size(); ++i) {
    const double th = radius * 0.5 * (gx[i] + 1.0);
    sum += gw[i] * std::pow(std::sin(th), d - 2);
  }
  return sphere_area(d - 1) * sum * 0.5 * radius;
}

SpherePoint SphereGrid::node(int i, int j) const {
  const double st = std::sin(theta[i]);
  const double ct = std::cos(theta[i]);
  const double ph = phi(j);
  return SpherePoint(st * std::cos(ph), st * std::sin(ph), ct);
}

SphereGrid build_grid(int exactness, int oversample) {
  if (exactness < 0) throw std::invalid_argument("build_grid: exactness must be >= 0");
  if (oversample < 1) throw std::invalid_argument("build_grid: oversample must be >= 1");
  const int m = ((exactness + 2) / 2) * oversample;
  Eigen::ArrayXd x, w;
  gauss_legendre(m, x, w);
  SphereGrid g;
  g.theta.resize(m);
  g.polar_weight.resize(m);
  for (int i = 0; i < m; ++i) {
    g.theta[i] = std::acos(clamp1(x[m - 1 - i]));  // ascending polar angle
    g.polar_weight[i] = w[m - 1 - i];
  }
  g.n_phi = (exactness + 1) * oversample;
  g.exactness = exactness;
  return g;
}

namespace {

void check_sample_shape(const SphereGrid& grid, const GridSamples& s, const char* who) {
  if (s.rows() != grid.rows() || s.cols() != grid.n_phi)
    throw std::invalid_argument(std::string(who) + ": sample shape does not match the grid");
}

}  // namespace

double grid_integral(const SphereGrid& grid, const GridSamples& samples) {
  check_sample_shape(grid, samples, "grid_integral");
  return (samples.rowwise().sum().array() * grid.polar_weight).sum() * 2.0 * M_PI /
         grid.n_phi;
}

double lp_norm_sphere(const GridSamples& samples, double p, const SphereGrid& grid) {
  check_sample_shape(grid, samples, "lp_norm_sphere");
  if (std::isinf(p)) return samples.cwiseAbs().maxCoeff();
  if (!(p > 0.0)) throw std::invalid_argument("lp_norm_sphere: p must be positive");
  Eigen::ArrayXXd a = samples.array().abs();
  if (p == 2.0)
    a = a.square();
  else if (p != 1.0)
    a = a.pow(p);
  const double integral =
      (a.rowwise().sum() * grid.polar_weight).sum() * 2.0 * M_PI / grid.n_phi;
  return std::pow(integral, 1.0 / p);
}

GridSamples sample_zonal(const SphereGrid& grid, const ZonalKernel& kern,
                         const SpherePoint& axis) {
  require_unit(axis, "sample_zonal");
  const Eigen::Index m = grid.rows();
  GridSamples out(m, grid.n_phi);
  if ((axis - SpherePoint::UnitZ()).norm() < 1e-13) {
    const Eigen::ArrayXd vals = eval_zonal(kern, grid.theta.cos());
    out.colwise() = vals.matrix();
    return out;
  }
  Eigen::ArrayXd az_c(grid.n_phi), az_s(grid.n_phi);
  for (int j = 0; j < grid.n_phi; ++j) {
    az_c[j] = std::cos(grid.phi(j));
    az_s[j] = std::sin(grid.phi(j));
  }
  const Eigen::ArrayXd st = grid.theta.sin();
  const Eigen::ArrayXd ct = grid.theta.cos();
  Eigen::MatrixXd t = st.matrix() * (axis.x() * az_c + axis.y() * az_s).matrix().transpose();
  t.colwise() += (ct * axis.z()).matrix();
  const Eigen::Map<Eigen::ArrayXd> flat(t.data(), t.size());
  Eigen::ArrayXd vals = eval_zonal(kern, flat.min(1.0).max(-1.0));
  out = Eigen::Map<GridSamples>(vals.data(), m, grid.n_phi);
  return out;
}

GridSamples sample_pointwise(const SphereGrid& grid,
                             const std::function<double(const SpherePoint&)>& f) {
  GridSamples out(grid.rows(), grid.n_phi);
  for (Eigen::Index i = 0; i < grid.rows(); ++i)
    for (int j = 0; j < grid.n_phi; ++j)
      out(i, j) = f(grid.node(static_cast<int>(i), j));
  return out;
}

// ---------------------------------------------------------------------------
// Zonally adapted polar rules

namespace {

// Sign-change breakpoints of the kernel on [-1,1], endpoints included.
// Scanned uniformly in the polar angle: the zeros of a degree-N expansion
// keep a gap of order 1/N there, while in t they cluster at the endpoints.
std::vector<double> zonal_breaks(const ZonalKernel& kern) {
  const int nsamp = std::max(512, 16 * (kern.degree() + 1));
  const Eigen::ArrayXd ts =
      Eigen::ArrayXd::LinSpaced(nsamp + 1, M_PI, 0.0).cos();
  const Eigen::ArrayXd vs = eval_zonal(kern, ts);
  std::vector<double> breaks;
  breaks.push_back(-1.0);
  for (int i = 0; i < nsamp; ++i) {
    double a = ts[i], b = ts[i + 1];
    double fa = vs[i];
    const double fb = vs[i + 1];
    if (fa == 0.0) {
      if (a > breaks.back() + 1e-12 && a < 1.0 - 1e-12) breaks.push_back(a);
      continue;
    }
    if ((fa < 0.0) == (fb < 0.0) || fb == 0.0) continue;
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = eval_zonal(kern, mid);
      if (fm == 0.0) {
        a = b = mid;
        break;
      }
      if ((fa < 0.0) != (fm < 0.0)) {
        b = mid;
      } else {
        a = mid;
        fa = fm;
      }
    }
    const double z = 0.5 * (a + b);
    if (z > breaks.back() + 1e-12 && z < 1.0 - 1e-12) breaks.push_back(z);
  }
  breaks.push_back(1.0);
  return breaks;
}

const std::pair<Eigen::ArrayXd, Eigen::ArrayXd>& cached_rule(double a, double b, int m) {
  static std::map<std::tuple<double, double, int>,
                  std::pair<Eigen::ArrayXd, Eigen::ArrayXd>>
      cache;
  const auto key = std::make_tuple(a, b, m);
  auto it = cache.find(key);
  if (it == cache.end()) {
    Eigen::ArrayXd x, w;
    gauss_jacobi(a, b, m, x, w);
    it = cache.emplace(key, std::make_pair(std::move(x), std::move(w))).first;
  }
  return it->second;
}

PolarRule rule_from_breaks(const std::vector<double>& breaks, double p, int order) {
  std::vector<std::pair<double, double>> nodes;
  nodes.reserve((breaks.size() - 1) * order);
  for (std::size_t q = 0; q + 1 < breaks.size(); ++q) {
    const double lo = breaks[q], hi = breaks[q + 1];
    const double e_lo = lo > -1.0 ? p : 0.0;
    const double e_hi = hi < 1.0 ? p : 0.0;
    const auto& rule = cached_rule(e_hi, e_lo, order);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (int k = 0; k < order; ++k) {
      const double x = rule.first[k];
      double w = half * rule.second[k];
      if (e_lo > 0.0) w *= std::pow(1.0 + x, -e_lo);
      if (e_hi > 0.0) w *= std::pow(1.0 - x, -e_hi);
      nodes.emplace_back(std::acos(clamp1(mid + half * x)), w);
    }
  }
  std::sort(nodes.begin(), nodes.end());
  PolarRule out;
  out.theta.resize(static_cast<Eigen::Index>(nodes.size()));
  out.weight.resize(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.theta[i] = nodes[i].first;
    out.weight[i] = nodes[i].second;
  }
  return out;
}

}  // namespace

PolarRule zonal_split_rule(const ZonalKernel& kern, double p, int order) {
  if (!(p > 0.0) || std::isinf(p))
    throw std::invalid_argument("zonal_split_rule: p must be positive and finite");
  if (order < 2 || order > 1024)
    throw std::invalid_argument("zonal_split_rule: order out of range");
  return rule_from_breaks(zonal_breaks(kern), p, order);
}

SphereGrid zonal_adapted_grid(const ZonalKernel& kern, double p, int order, int n_phi) {
  PolarRule rule = zonal_split_rule(kern, p, order);
  SphereGrid g;
  g.theta = std::move(rule.theta);
  g.polar_weight = std::move(rule.weight);
  g.n_phi = std::max(1, n_phi);
  g.exactness = -1;
  return g;
}

double lp_norm_zonal_ambient(const ZonalKernel& kern, double p, double tol) {
  if (!(p > 0.0) || std::isinf(p))
    throw std::invalid_argument("lp_norm_zonal_ambient: p must be positive and finite");
  const std::vector<double> breaks = zonal_breaks(kern);
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (const int order : {16, 32, 64, 128, 256}) {
    const PolarRule rule = rule_from_breaks(breaks, p, order);
    const Eigen::ArrayXd vals = eval_zonal(kern, rule.theta.cos());
    const double integral = (rule.weight * vals.abs().pow(p)).sum();
    if (std::isfinite(prev) &&
        std::abs(integral - prev) <= tol * std::max(std::abs(integral), 1e-300))
      return std::pow(2.0 * M_PI * integral, 1.0 / p);
    prev = integral;
  }
  throw std::runtime_error("lp_norm_zonal_ambient: panel-order ladder failed to converge");
}

// ---------------------------------------------------------------------------
// Real spherical harmonics

SHExpansion SHExpansion::zero(int max_degree) {
  if (max_degree < 0)
    throw std::invalid_argument("SHExpansion: max_degree must be >= 0");
  SHExpansion f;
  f.max_degree = max_degree;
  f.coeff = Eigen::VectorXd::Zero((max_degree + 1) * (max_degree + 1));
  return f;
}

Eigen::MatrixXd legendre_table(int L, int m, const Eigen::ArrayXd& x) {
  if (m < 0 || L < m) throw std::invalid_argument("legendre_table: need 0 <= m <= L");
  const Eigen::Index nx = x.size();
  Eigen::MatrixXd P(L - m + 1, nx);
  Eigen::ArrayXd pmm = Eigen::ArrayXd::Constant(nx, std::sqrt(0.5));
  if (m > 0) {
    const Eigen::ArrayXd sx = (1.0 - x.square()).max(0.0).sqrt();
    for (int k = 1; k <= m; ++k)
      pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * sx;
  }
  const Eigen::RowVectorXd xr = x.matrix().transpose();
  P.row(0) = pmm.matrix().transpose();
  if (L > m)
    P.row(1) = std::sqrt(2.0 * m + 3.0) * (xr.array() * pmm.transpose()).matrix();
  for (int l = m + 2; l <= L; ++l) {
    const double ll = static_cast<double>(l);
    const double lm = static_cast<double>(l - 1);
    const double a = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - double(m) * m));
    const double b =
        std::sqrt((lm * lm - double(m) * m) / (4.0 * lm * lm - 1.0));
    P.row(l - m) =
        a * (xr.array() * P.row(l - m - 1).array() - b * P.row(l - m - 2).array())
            .matrix();
  }
  return P;
}

Eigen::VectorXd sh_basis_vector(int L, const SpherePoint& x) {
  require_unit(x, "sh_basis_vector");
  if (L < 0) throw std::invalid_argument("sh_basis_vector: degree must be >= 0");
  Eigen::ArrayXd one(1);
  one[0] = clamp1(x.z());
  const double ph = std::atan2(x.y(), x.x());
  Eigen::VectorXd out((L + 1) * (L + 1));
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
  for (int m = 0; m <= L; ++m) {
    const Eigen::MatrixXd tab = legendre_table(L, m, one);
    if (m == 0) {
      for (int l = 0; l <= L; ++l) out[l * l + l] = tab(l, 0) * inv_sqrt_2pi;
    } else {
      const double c = std::cos(m * ph), s = std::sin(m * ph);
      for (int l = m; l <= L; ++l) {
        const double v = tab(l - m, 0) * inv_sqrt_pi;
        out[l * l + l + m] = v * c;
        out[l * l + l - m] = v * s;
      }
    }
  }
  return out;
}

double sh_basis(int l, int m, const SpherePoint& x) {
  if (l < 0 || std::abs(m) > l)
    throw std::invalid_argument("sh_basis: invalid degree/order pair");
  require_unit(x, "sh_basis");
  const int ma = std::abs(m);
  Eigen::ArrayXd one(1);
  one[0] = clamp1(x.z());
  const double pv = legendre_table(l, ma, one)(l - ma, 0);
  if (m == 0) return pv / std::sqrt(2.0 * M_PI);
  const double ph = std::atan2(x.y(), x.x());
  const double v = pv / std::sqrt(M_PI);
  return m > 0 ? v * std::cos(ma * ph) : v * std::sin(ma * ph);
}

Eigen::MatrixXd sh_basis_matrix(int L, const Eigen::Matrix3Xd& pts) {
  if (L < 0) throw std::invalid_argument("sh_basis_matrix: degree must be >= 0");
  const Eigen::Index n = pts.cols();
  Eigen::ArrayXd z(n), ph(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    z[j] = clamp1(pts(2, j));
    ph[j] = std::atan2(pts(1, j), pts(0, j));
  }
  Eigen::MatrixXd out((L + 1) * (L + 1), n);
  const double i2pi = 1.0 / std::sqrt(2.0 * M_PI);
  const double ipi = 1.0 / std::sqrt(M_PI);
  for (int m = 0; m <= L; ++m) {
    const Eigen::MatrixXd tab = legendre_table(L, m, z);
    if (m == 0) {
      for (int l = 0; l <= L; ++l) out.row(l * l + l) = tab.row(l) * i2pi;
    } else {
      const Eigen::ArrayXd c = (m * ph).cos(), s = (m * ph).sin();
      for (int l = m; l <= L; ++l) {
        out.row(l * l + l + m) =
            (tab.row(l - m).transpose().array() * c).matrix().transpose() * ipi;
        out.row(l * l + l - m) =
            (tab.row(l - m).transpose().array() * s).matrix().transpose() * ipi;
      }
    }
  }
  return out;
}

SHExpansion sh_transform(const SphereGrid& grid, const GridSamples& samples,
                         int max_degree) {
  if (max_degree < 0) throw std::invalid_argument("sh_transform: degree must be >= 0");
  if (grid.exactness < 2 * max_degree)
    throw std::invalid_argument("sh_transform: grid exactness below twice the degree");
  check_sample_shape(grid, samples, "sh_transform");
  const int L = max_degree;
  const Eigen::ArrayXd ct = grid.theta.cos();
  Eigen::ArrayXd phiv(grid.n_phi);
  for (int j = 0; j < grid.n_phi; ++j) phiv[j] = grid.phi(j);
  const double dphi = 2.0 * M_PI / grid.n_phi;
  SHExpansion f = SHExpansion::zero(L);
  for (int m = 0; m <= L; ++m) {
    const Eigen::MatrixXd P = legendre_table(L, m, ct);
    const Eigen::VectorXd cm = samples * (m * phiv).cos().matrix() * dphi;
    const Eigen::VectorXd pc = P * (cm.array() * grid.polar_weight).matrix();
    if (m == 0) {
      for (int l = 0; l <= L; ++l) f.at(l, 0) = pc[l] / std::sqrt(2.0 * M_PI);
    } else {
      const Eigen::VectorXd sm = samples * (m * phiv).sin().matrix() * dphi;
      const Eigen::VectorXd ps = P * (sm.array() * grid.polar_weight).matrix();
      for (int l = m; l <= L; ++l) {
        f.at(l, m) = pc[l - m] / std::sqrt(M_PI);
        f.at(l, -m) = ps[l - m] / std::sqrt(M_PI);
      }
    }
  }
  return f;
}

GridSamples inverse_sh(const SphereGrid& grid, const SHExpansion& f) {
  if (f.max_degree < 0)
    throw std::invalid_argument("inverse_sh: expansion is uninitialized");
  const int L = f.max_degree;
  const Eigen::ArrayXd ct = grid.theta.cos();
  Eigen::ArrayXd phiv(grid.n_phi);
  for (int j = 0; j < grid.n_phi; ++j) phiv[j] = grid.phi(j);
  GridSamples out = GridSamples::Zero(grid.rows(), grid.n_phi);
  for (int m = 0; m <= L; ++m) {
    Eigen::VectorXd cc(L - m + 1), cs(L - m + 1);
    bool live = false;
    for (int l = m; l <= L; ++l) {
      cc[l - m] = f.at(l, m);
      cs[l - m] = m > 0 ? f.at(l, -m) : 0.0;
      live = live || cc[l - m] != 0.0 || cs[l - m] != 0.0;
    }
    if (!live) continue;
    const Eigen::MatrixXd P = legendre_table(L, m, ct);
    const Eigen::VectorXd gc = P.transpose() * cc;
    if (m == 0) {
      out.colwise() += gc / std::sqrt(2.0 * M_PI);
    } else {
      const Eigen::VectorXd gs = P.transpose() * cs;
      const Eigen::RowVectorXd cr = (m * phiv).cos().matrix().transpose();
      const Eigen::RowVectorXd sr = (m * phiv).sin().matrix().transpose();
      out.noalias() += (gc / std::sqrt(M_PI)) * cr;
      out.noalias() += (gs / std::sqrt(M_PI)) * sr;
    }
  }
  return out;
}

double sh_eval(const SHExpansion& f, const SpherePoint& x) {
  if (f.max_degree < 0)
    throw std::invalid_argument("sh_eval: expansion is uninitialized");
  return f.coeff.dot(sh_basis_vector(f.max_degree, x));
}

SHExpansion zonal_to_expansion(const ZonalKernel& kern, const SpherePoint& axis) {
  if (std::abs(kern.params.alpha) > 1e-12 || std::abs(kern.params.beta) > 1e-12)
    throw std::invalid_argument(
        "zonal_to_expansion: kernel parameters must be (0,0) to match S^2");
  require_unit(axis, "zonal_to_expansion");
  const int L = kern.degree();
  SHExpansion f = SHExpansion::zero(L);
  const Eigen::VectorXd basis = sh_basis_vector(L, axis);
  for (int l = 0; l <= L; ++l) {
    const double scale = 4.0 * M_PI * kern.coeff[l];
    if (scale == 0.0) continue;
    for (int m = -l; m <= l; ++m) f.at(l, m) = scale * basis[l * l + l + m];
  }
  return f;
}

double lp_norm_sphere(const SHExpansion& f, double p, const SphereGrid& grid) {
  return lp_norm_sphere(inverse_sh(grid, f), p, grid);
}

// ---------------------------------------------------------------------------
// Separated point sets

SeparatedSet build_separated_set(double epsilon, std::uint64_t seed) {
  if (!(epsilon > 0.0) || !(epsilon < M_PI))
    throw std::invalid_argument("build_separated_set: epsilon must lie in (0, pi)");
  const int base = static_cast<int>(std::ceil(230.0 / (epsilon * epsilon))) + 128;
  const int cap = static_cast<int>(std::ceil(64.0 / (epsilon * epsilon))) + 64;
  Eigen::Matrix3Xd cand(3, base + cap);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < base; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / base;
    const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double ph = golden * i;
    cand.col(i) << rad * std::cos(ph), rad * std::sin(ph), z;
  }
  Rng rng(seed);
  Eigen::Matrix3d gauss;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) gauss(r, c) = rng.normal();
  Eigen::Matrix3d rot = Eigen::HouseholderQR<Eigen::Matrix3d>(gauss).householderQ();
  if (rot.determinant() < 0.0) rot.col(2) *= -1.0;
  cand.leftCols(base) = rot * cand.leftCols(base);

  int ncand = base;
  std::vector<int> chosen;
  Eigen::ArrayXd maxdot = Eigen::ArrayXd::Constant(base + cap, -2.0);
  const double cos_eps = std::cos(epsilon);

  const auto add_point = [&](int idx) {
    chosen.push_back(idx);
    const Eigen::Vector3d pnt = cand.col(idx);
    maxdot.head(ncand) =
        maxdot.head(ncand).max((cand.leftCols(ncand).transpose() * pnt).array());
    if (ncand < base + cap) {
      // The antipode is the global distance maximizer; keep it as a candidate
      // so that near-pi separations are still found on the coarse grid.
      cand.col(ncand) = -pnt;
      double m = -2.0;
      for (const int j : chosen) m = std::max(m, -pnt.dot(cand.col(j)));
      maxdot[ncand] = m;
      ++ncand;
    }
  };

  add_point(static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(base)));
  while (true) {
    int arg = 0;
    const double worst = maxdot.head(ncand).minCoeff(&arg);
    if (worst > cos_eps) {
      SeparatedSet out;
      out.points.resize(3, static_cast<Eigen::Index>(chosen.size()));
      for (std::size_t i = 0; i < chosen.size(); ++i)
        out.points.col(static_cast<Eigen::Index>(i)) = cand.col(chosen[i]);
      out.epsilon = epsilon;
      out.covering_radius = std::acos(clamp1(worst));
      out.maximal = true;
      return out;
    }
    if (static_cast<int>(chosen.size()) >= cap)
      throw std::logic_error("build_separated_set: covering certificate failed");
    add_point(arg);
  }
}

double min_pairwise_separation(const Eigen::Matrix3Xd& points) {
  const Eigen::Index k = points.cols();
  if (k < 2) return M_PI;
  double maxd = -1.0;
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    const double m =
        (points.rightCols(k - i - 1).transpose() * points.col(i)).maxCoeff();
    maxd = std::max(maxd, m);
  }
  return std::acos(clamp1(maxd));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void read_header_field(std::istream& in, const std::string& path,
                       const char* expect, double& value) {
  std::string key;
  in >> key >> value;
  if (!in || key != expect)
    throw std::runtime_error("load: malformed header field '" + key + "' in " + path);
}

}  // namespace

void save_point_set(const std::string& path, const SeparatedSet& set) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_point_set: cannot open " + path);
  out << std::setprecision(17);
  out << "zonal-point-set 1\n";
  out << "epsilon " << set.epsilon << "\n";
  out << "covering_radius " << set.covering_radius << "\n";
  out << "maximal " << (set.maximal ? 1 : 0) << "\n";
  out << "count " << set.size() << "\n";
  for (Eigen::Index i = 0; i < set.size(); ++i)
    out << set.points(0, i) << " " << set.points(1, i) << " " << set.points(2, i)
        << "\n";
  if (!out) throw std::runtime_error("save_point_set: write failed for " + path);
}

SeparatedSet load_point_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_point_set: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (!in || magic != "zonal-point-set" || version != 1)
    throw std::runtime_error("load_point_set: bad header in " + path);
  SeparatedSet set;
  double maximal_flag = 0.0, count = -1.0;
  read_header_field(in, path, "epsilon", set.epsilon);
  read_header_field(in, path, "covering_radius", set.covering_radius);
  read_header_field(in, path, "maximal", maximal_flag);
  read_header_field(in, path, "count", count);
  const long long k = static_cast<long long>(count);
  if (k < 0 || k != count)
    throw std::runtime_error("load_point_set: bad count in " + path);
  set.maximal = maximal_flag != 0.0;
  set.points.resize(3, static_cast<Eigen::Index>(k));
  for (long long i = 0; i < k; ++i) {
    double x = 0, y = 0, z = 0;
    in >> x >> y >> z;
    set.points.col(static_cast<Eigen::Index>(i)) << x, y, z;
  }
  if (!in) throw std::runtime_error("load_point_set: truncated data in " + path);
  for (Eigen::Index i = 0; i < set.size(); ++i)
    if (!is_unit(set.points.col(i), 1e-9))
      throw std::runtime_error("load_point_set: unit-norm certificate violated in " + path);
  if (set.size() > 1 &&
      min_pairwise_separation(set.points) < set.epsilon - 1e-9)
    throw std::runtime_error("load_point_set: separation certificate violated in " + path);
  return set;
}

namespace {

void validate_grid(const SphereGrid& g, const std::string& context) {
  if (g.n_phi < 1 || g.rows() < 1)
    throw std::runtime_error(context + ": empty grid");
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    if (!(g.theta[i] > 0.0) || !(g.theta[i] < M_PI) || !(g.polar_weight[i] > 0.0) ||
        !std::isfinite(g.polar_weight[i]))
      throw std::runtime_error(context + ": invalid polar node or weight");
    if (i > 0 && g.theta[i] < g.theta[i - 1])
      throw std::runtime_error(context + ": polar nodes not ascending");
  }
  if (g.exactness < 0) return;  // special-purpose rule: no polynomial certificate
  if (g.n_phi < g.exactness + 1 || 2 * g.rows() - 1 < g.exactness)
    throw std::runtime_error(context + ": node counts below the declared exactness");
  if (std::abs(g.polar_weight.sum() - 2.0) > 1e-11)
    throw std::runtime_error(context + ": mass certificate violated");
  const int lmax = std::min(g.exactness, 16);
  if (lmax >= 1) {
    const Eigen::MatrixXd P = legendre_table(lmax, 0, g.theta.cos());
    for (int l = 1; l <= lmax; ++l)
      if (std::abs(P.row(l).dot(g.polar_weight.matrix())) > 1e-10)
        throw std::runtime_error(context + ": exactness certificate violated");
  }
}

}  // namespace

void save_grid(const std::string& path, const SphereGrid& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_grid: cannot open " + path);
  out << std::setprecision(17);
  out << "zonal-sphere-grid 1\n";
  out << "exactness " << grid.exactness << "\n";
  out << "n_phi " << grid.n_phi << "\n";
  out << "count " << grid.rows() << "\n";
  for (Eigen::Index i = 0; i < grid.rows(); ++i)
    out << grid.theta[i] << " " << grid.polar_weight[i] << "\n";
  if (!out) throw std::runtime_error("save_grid: write failed for " + path);
}

SphereGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_grid: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (!in || magic != "zonal-sphere-grid" || version != 1)
    throw std::runtime_error("load_grid: bad header in " + path);
  double exactness = 0, n_phi = 0, count = 0;
  read_header_field(in, path, "exactness", exactness);
  read_header_field(in, path, "n_phi", n_phi);
  read_header_field(in, path, "count", count);
  SphereGrid g;
  g.exactness = static_cast<int>(exactness);
  g.n_phi = static_cast<int>(n_phi);
  const long long m = static_cast<long long>(count);
  if (m < 1 || m != count) throw std::runtime_error("load_grid: bad count in " + path);
  g.theta.resize(static_cast<Eigen::Index>(m));
  g.polar_weight.resize(static_cast<Eigen::Index>(m));
  for (long long i = 0; i < m; ++i) in >> g.theta[i] >> g.polar_weight[i];
  if (!in) throw std::runtime_error("load_grid: truncated data in " + path);
  validate_grid(g, "load_grid(" + path + ")");
  return g;
}

}  // namespace zonal
