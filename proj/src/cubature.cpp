#include "zonal/cubature.hpp"

#include "zonal/jacobi.hpp"
#include "zonal/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace zonal {

namespace {

struct WeightedRule {
  Eigen::Matrix3Xd points;
  Eigen::ArrayXd weight;  // absorbs w(x) dsigma(x)
};

// Tensor Gauss-Jacobi rule per octant panel.  The polar variable u =
// cos(theta) contributes (1-u^2)^{(a1+a2)/2} |u|^{a3} du and the azimuth
// |cos(phi)|^{a1} |sin(phi)|^{a2} dphi; both algebraic factors vanish at
// panel ends, so each panel maps onto the matching Gauss-Jacobi weight and
// only a smooth remainder is evaluated at the nodes.
WeightedRule octant_rule(const Weight& w, int order) {
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  if (w.kind == WeightKind::power) a = w.exponents;
  const double s12 = a[0] + a[1];
  WeightedRule r;
  r.points.resize(3, 8 * order * order);
  r.weight.resize(8 * order * order);
  int idx = 0;
  for (int pp = 0; pp < 2; ++pp) {
    Eigen::ArrayXd px, pw;
    const double ea = (pp == 0) ? s12 / 2.0 : a[2];
    const double eb = (pp == 0) ? a[2] : s12 / 2.0;
    gauss_jacobi(ea, eb, order, px, pw);
    Eigen::ArrayXd u(order), polar(order);
    for (int i = 0; i < order; ++i) {
      u[i] = (pp == 0) ? (px[i] + 1.0) / 2.0 : (px[i] - 1.0) / 2.0;
      const double su2 = std::max(0.0, 1.0 - u[i] * u[i]);
      const double full =
          std::pow(su2, s12 / 2.0) * std::pow(std::abs(u[i]), a[2]) * 0.5;
      polar[i] =
          pw[i] * full / (std::pow(1.0 - px[i], ea) * std::pow(1.0 + px[i], eb));
    }
    for (int ap = 0; ap < 4; ++ap) {
      Eigen::ArrayXd qx, qw;
      // |cos| vanishes at odd multiples of pi/2, |sin| at even ones
      const double ca = (ap % 2 == 0) ? a[0] : a[1];
      const double cb = (ap % 2 == 0) ? a[1] : a[0];
      gauss_jacobi(ca, cb, order, qx, qw);
      const double left = ap * M_PI / 2.0, h = M_PI / 4.0;
      for (int j = 0; j < order; ++j) {
        const double phi = left + h * (qx[j] + 1.0);
        const double full = std::pow(std::abs(std::cos(phi)), a[0]) *
                            std::pow(std::abs(std::sin(phi)), a[1]) * h;
        const double azi = qw[j] * full / (std::pow(1.0 - qx[j], ca) *
                                           std::pow(1.0 + qx[j], cb));
        for (int i = 0; i < order; ++i) {
          const double st = std::sqrt(std::max(0.0, 1.0 - u[i] * u[i]));
          r.points.col(idx) << st * std::cos(phi), st * std::sin(phi), u[i];
          double v = polar[i] * azi;
          if (w.kind == WeightKind::custom) {
            v *= w(r.points.col(idx).normalized());
          } else {
            v *= w.normalizer;
          }
          r.weight[idx] = v;
          ++idx;
        }
      }
    }
  }
  return r;
}

Eigen::VectorXd moments_with_rule(const Weight& w, int L, int order) {
  const WeightedRule r = octant_rule(w, order);
  return sh_basis_matrix(L, r.points) * r.weight.matrix();
}

// Max defect over rotated axisymmetric harmonics that were not rows of the
// moment system; their true integrals come from the octant rule directly.
double held_out_defect(const Eigen::Matrix3Xd& nodes,
                       const Eigen::VectorXd& lambda, const Weight& w, int L) {
  const WeightedRule rule = octant_rule(w, 96);
  Rng rng(0x5eedc0deULL);
  double worst = 0.0;
  for (int draw = 0; draw < 8; ++draw) {
    SpherePoint axis(rng.normal(), rng.normal(), rng.normal());
    axis.normalize();
    const int l = 1 + static_cast<int>(rng.uniform() * L);
    const Eigen::ArrayXd tn =
        (nodes.transpose() * axis).array().min(1.0).max(-1.0);
    const Eigen::ArrayXd tc =
        (rule.points.transpose() * axis).array().min(1.0).max(-1.0);
    const Eigen::RowVectorXd qn = legendre_table(l, 0, tn).row(l);
    const Eigen::RowVectorXd qc = legendre_table(l, 0, tc).row(l);
    const double discrete = qn * lambda;
    const double continuous = qc * rule.weight.matrix();
    worst = std::max(worst, std::abs(discrete - continuous));
  }
  return worst;
}

std::string weight_spec_string(const Weight& w) {
  if (w.kind == WeightKind::unit) return "unit";
  if (w.kind == WeightKind::power) {
    std::ostringstream os;
    os << std::setprecision(17) << "power:" << w.exponents[0] << ","
       << w.exponents[1] << "," << w.exponents[2];
    return os.str();
  }
  throw std::invalid_argument(
      "save_cubature: only unit and power weights serialize");
}

void read_field(std::istream& in, const std::string& path,
                const std::string& name, std::string& value) {
  std::string key;
  in >> key >> value;
  if (!in || key != name)
    throw std::runtime_error("load_cubature: expected field '" + name +
                             "' in " + path);
}

}  // namespace

Eigen::VectorXd weighted_moments(const Weight& w, int max_degree) {
  if (max_degree < 0)
    throw std::invalid_argument("weighted_moments: degree must be >= 0");
  Eigen::VectorXd prev = moments_with_rule(w, max_degree, 48);
  for (int order : {64, 96, 128}) {
    const Eigen::VectorXd cur = moments_with_rule(w, max_degree, order);
    const double diff = (cur - prev).cwiseAbs().maxCoeff();
    if (diff <= 1e-12 * std::max(1.0, cur.cwiseAbs().maxCoeff())) return cur;
    prev = cur;
  }
  throw std::runtime_error(
      "weighted_moments: quadrature ladder failed to converge; the weight is "
      "too rough for the octant panels");
}

Cubature solve_cubature(const SeparatedSet& nodes, const Weight& w, int n,
                        double residual_tol, double delta0) {
  if (n < 1) throw std::invalid_argument("solve_cubature: scale must be >= 1");
  if (!(delta0 > 0.0))
    throw std::invalid_argument("solve_cubature: delta0 must be positive");
  if (!(residual_tol > 0.0))
    throw std::invalid_argument("solve_cubature: residual_tol must be positive");
  if (nodes.size() == 0)
    throw std::invalid_argument("solve_cubature: empty node set");
  if (nodes.epsilon > delta0 / n + 1e-12)
    throw std::invalid_argument(
        "solve_cubature: node separation exceeds delta0/n; build a denser "
        "separated set");
  const int L = 4 * n;
  const int rows = (L + 1) * (L + 1);
  const Eigen::Index N = nodes.size();
  if (N < rows)
    throw std::runtime_error(
        "solve_cubature: fewer nodes than moment conditions; use a smaller "
        "separation (denser nodes)");

  const Eigen::VectorXd m = weighted_moments(w, L);
  const Eigen::MatrixXd A = sh_basis_matrix(L, nodes.points);
  Eigen::VectorXd cap_mass(N);
  for (Eigen::Index i = 0; i < N; ++i)
    cap_mass[i] = cap_weight_integral(w, nodes.points.col(i), 1.0 / n);
  if (!(cap_mass.minCoeff() > 0.0))
    throw std::runtime_error("solve_cubature: vanishing cap mass at a node");

  // lambda = cap_mass .* mu: the correction runs in cap-mass-scaled
  // variables so it distributes proportionally to the initializer and keeps
  // the weights on the degenerate circles positive.
  const Eigen::MatrixXd AD = A * cap_mass.asDiagonal();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(rows, rows);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(AD);
  const Eigen::LLT<Eigen::MatrixXd> llt(gram.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "solve_cubature: scaled Gram matrix not positive definite; use a "
        "smaller separation (denser nodes)");

  const double mass = m[0] * std::sqrt(4.0 * M_PI);
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(N, mass / cap_mass.sum());
  const double target = std::min(residual_tol / 4.0, 1e-10);
  bool converged = false;
  for (int it = 0; it < 500; ++it) {
    const Eigen::VectorXd defect = m - AD * mu;
    if (defect.cwiseAbs().maxCoeff() <= target && mu.minCoeff() >= 0.0) {
      converged = true;
      break;
    }
    mu += AD.transpose() * llt.solve(defect);
    for (Eigen::Index i = 0; i < N; ++i) mu[i] = std::max(mu[i], 0.0);
  }
  if (!converged)
    throw std::runtime_error(
        "solve_cubature: residual tolerance not met; use a smaller separation "
        "(denser nodes)");

  Cubature cub;
  cub.nodes = nodes;
  cub.lambda = cap_mass.cwiseProduct(mu);
  cub.exactness_degree = L;
  cub.weight_fn = w;
  const double basis_defect = (m - A * cub.lambda).cwiseAbs().maxCoeff();
  cub.residual = std::max(basis_defect,
                          held_out_defect(nodes.points, cub.lambda, w, L));
  if (cub.residual > residual_tol)
    throw std::runtime_error(
        "solve_cubature: certified residual exceeds the tolerance; use a "
        "smaller separation (denser nodes)");
  return cub;
}

MZStats mz_check(const Cubature& cub, double p, int samples,
                 std::uint64_t seed) {
  if (!(p > 0.0) || std::isinf(p))
    throw std::invalid_argument("mz_check: needs finite p > 0");
  if (samples < 1)
    throw std::invalid_argument("mz_check: needs at least one sample");
  const int n = cub.exactness_degree / 4;
  const int dim = (n + 1) * (n + 1);
  const Eigen::MatrixXd at_nodes = sh_basis_matrix(n, cub.nodes.points);
  const WeightedRule rule = octant_rule(cub.weight_fn, 64);
  const Eigen::MatrixXd at_rule = sh_basis_matrix(n, rule.points);
  MZStats st;
  st.ratios.resize(samples);
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd coeff(dim);
    for (int i = 0; i < dim; ++i) coeff[i] = rng.normal();
    const Eigen::ArrayXd fd = (at_nodes.transpose() * coeff).array();
    const Eigen::ArrayXd fc = (at_rule.transpose() * coeff).array();
    const double discrete =
        std::pow((cub.lambda.array() * fd.abs().pow(p)).sum(), 1.0 / p);
    const double continuous =
        std::pow((rule.weight * fc.abs().pow(p)).sum(), 1.0 / p);
    st.ratios[s] = discrete / continuous;
  }
  st.min_ratio = st.ratios.minCoeff();
  st.max_ratio = st.ratios.maxCoeff();
  return st;
}

void save_cubature(const std::string& path, const Cubature& cub) {
  const std::string wspec = weight_spec_string(cub.weight_fn);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_cubature: cannot open " + path);
  out << std::setprecision(17);
  out << "zonal-cubature 1\n";
  out << "exactness " << cub.exactness_degree << "\n";
  out << "weight " << wspec << "\n";
  out << "residual " << cub.residual << "\n";
  out << "epsilon " << cub.nodes.epsilon << "\n";
  out << "covering_radius " << cub.nodes.covering_radius << "\n";
  out << "maximal " << (cub.nodes.maximal ? 1 : 0) << "\n";
  out << "count " << cub.nodes.size() << "\n";
  for (Eigen::Index i = 0; i < cub.nodes.size(); ++i)
    out << cub.nodes.points(0, i) << " " << cub.nodes.points(1, i) << " "
        << cub.nodes.points(2, i) << " " << cub.lambda[i] << "\n";
  if (!out) throw std::runtime_error("save_cubature: write failed for " + path);
}

Cubature load_cubature(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_cubature: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (!in || magic != "zonal-cubature" || version != 1)
    throw std::runtime_error("load_cubature: bad header in " + path);
  Cubature cub;
  std::string key, wspec;
  double maximal_flag = 0.0;
  long long count = -1;
  in >> key >> cub.exactness_degree;
  if (!in || key != "exactness")
    throw std::runtime_error("load_cubature: expected field 'exactness' in " +
                             path);
  read_field(in, path, "weight", wspec);
  in >> key >> cub.residual;
  if (!in || key != "residual")
    throw std::runtime_error("load_cubature: expected field 'residual' in " +
                             path);
  in >> key >> cub.nodes.epsilon;
  in >> key >> cub.nodes.covering_radius;
  in >> key >> maximal_flag;
  in >> key >> count;
  if (!in || key != "count" || count < 1)
    throw std::runtime_error("load_cubature: bad count in " + path);
  cub.nodes.maximal = maximal_flag != 0.0;
  cub.weight_fn = parse_weight(wspec);
  cub.nodes.points.resize(3, static_cast<Eigen::Index>(count));
  cub.lambda.resize(static_cast<Eigen::Index>(count));
  for (long long i = 0; i < count; ++i) {
    double x = 0, y = 0, z = 0, lam = 0;
    in >> x >> y >> z >> lam;
    cub.nodes.points.col(static_cast<Eigen::Index>(i)) << x, y, z;
    cub.lambda[static_cast<Eigen::Index>(i)] = lam;
  }
  if (!in) throw std::runtime_error("load_cubature: truncated data in " + path);
  for (Eigen::Index i = 0; i < cub.nodes.size(); ++i)
    if (!is_unit(cub.nodes.points.col(i), 1e-9))
      throw std::runtime_error(
          "load_cubature: unit-norm certificate violated in " + path);
  if (cub.nodes.size() > 1 &&
      min_pairwise_separation(cub.nodes.points) < cub.nodes.epsilon - 1e-9)
    throw std::runtime_error(
        "load_cubature: separation certificate violated in " + path);
  if (cub.lambda.minCoeff() < 0.0)
    throw std::runtime_error(
        "load_cubature: negative weight certificate violated in " + path);
  const Eigen::VectorXd m =
      weighted_moments(cub.weight_fn, cub.exactness_degree);
  const Eigen::MatrixXd A = sh_basis_matrix(cub.exactness_degree, cub.nodes.points);
  const double defect = (m - A * cub.lambda).cwiseAbs().maxCoeff();
  if (defect > std::max(1e-8, 2.0 * cub.residual))
    throw std::runtime_error(
        "load_cubature: exactness certificate violated in " + path);
  return cub;
}

}  // namespace zonal
