#include "zonal/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Geometry>

#include "zonal/kernels.hpp"
#include "zonal/operators.hpp"
#include "zonal/rng.hpp"

namespace zonal {
namespace {

// Highest block with coefficient mass above thr; -1 when the whole expansion
// is below it.
int actual_degree(const SHExpansion& f, double thr) {
  for (int l = f.max_degree; l >= 0; --l) {
    const int lo = l * l, len = 2 * l + 1;
    if (f.coeff.segment(lo, len).cwiseAbs().maxCoeff() > thr) return l;
  }
  return -1;
}

// All blocks up to degree k, unlike project() which slices out a single one.
SHExpansion truncate_blocks(const SHExpansion& f, int k) {
  const int top = std::min(k, f.max_degree);
  SHExpansion out = SHExpansion::zero(std::max(top, 0));
  if (top >= 0) out.coeff = f.coeff.head((top + 1) * (top + 1));
  return out;
}

SHExpansion add_scaled(const SHExpansion& a, const SHExpansion& b, double s) {
  SHExpansion out = SHExpansion::zero(std::max(a.max_degree, b.max_degree));
  out.coeff.head(a.coeff.size()) = a.coeff;
  out.coeff.head(b.coeff.size()) += s * b.coeff;
  return out;
}

void require_unit_measure(const Cubature& cub, const char* who) {
  if (cub.weight_fn.kind != WeightKind::unit)
    throw std::invalid_argument(std::string(who) +
                                ": the series construction needs unit-measure cubature");
  if (cub.lambda.size() == 0)
    throw std::invalid_argument(std::string(who) + ": cubature has no nodes");
}

// sum_j wts_j * Y_{lm}(x_j) for all l <= L, batched per order so the full
// basis matrix is never materialized.
Eigen::VectorXd weighted_basis_moments(int L, const Eigen::Matrix3Xd& pts,
                                       const Eigen::VectorXd& wts) {
  const Eigen::Index n = pts.cols();
  Eigen::ArrayXd z(n), ph(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    z[j] = std::clamp(pts(2, j), -1.0, 1.0);
    ph[j] = std::atan2(pts(1, j), pts(0, j));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero((L + 1) * (L + 1));
  const double i2pi = 1.0 / std::sqrt(2.0 * M_PI);
  const double ipi = 1.0 / std::sqrt(M_PI);
  for (int m = 0; m <= L; ++m) {
    const Eigen::MatrixXd tab = legendre_table(L, m, z);
    if (m == 0) {
      for (int l = 0; l <= L; ++l)
        out[l * l + l] = i2pi * tab.row(l).dot(wts.transpose());
    } else {
      const Eigen::VectorXd cw = ((m * ph).cos() * wts.array()).matrix();
      const Eigen::VectorXd sw = ((m * ph).sin() * wts.array()).matrix();
      for (int l = m; l <= L; ++l) {
        out[l * l + l + m] = ipi * tab.row(l - m).dot(cw.transpose());
        out[l * l + l - m] = ipi * tab.row(l - m).dot(sw.transpose());
      }
    }
  }
  return out;
}

// Synthesis at arbitrary points, batched per order.
Eigen::ArrayXd eval_at_points(const SHExpansion& f, const Eigen::Matrix3Xd& pts) {
  const int L = f.max_degree;
  const Eigen::Index n = pts.cols();
  Eigen::ArrayXd z(n), ph(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    z[j] = std::clamp(pts(2, j), -1.0, 1.0);
    ph[j] = std::atan2(pts(1, j), pts(0, j));
  }
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(n);
  for (int m = 0; m <= L; ++m) {
    Eigen::VectorXd cc(L - m + 1), cs(L - m + 1);
    bool live = false;
    for (int l = m; l <= L; ++l) {
      cc[l - m] = f.at(l, m);
      cs[l - m] = m > 0 ? f.at(l, -m) : 0.0;
      live = live || cc[l - m] != 0.0 || cs[l - m] != 0.0;
    }
    if (!live) continue;
    const Eigen::MatrixXd tab = legendre_table(L, m, z);
    const Eigen::ArrayXd gc = (cc.transpose() * tab).transpose().array();
    if (m == 0) {
      out += gc / std::sqrt(2.0 * M_PI);
    } else {
      const Eigen::ArrayXd gs = (cs.transpose() * tab).transpose().array();
      out += (gc * (m * ph).cos() + gs * (m * ph).sin()) / std::sqrt(M_PI);
    }
  }
  return out;
}

// Grid nodes as a 3 x N matrix, flat index = azimuth * rows + polar so that
// an Eigen::Map reshapes values straight back into GridSamples.
Eigen::Matrix3Xd grid_points(const SphereGrid& grid) {
  const Eigen::Index rows = grid.rows(), cols = grid.n_phi;
  Eigen::Matrix3Xd pts(3, rows * cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const SpherePoint x = grid.node(static_cast<int>(i), static_cast<int>(j));
      pts.col(j * rows + i) = x;
    }
  return pts;
}

// eta(l / (3n)) profile times the node moments: the smeared window field.
SHExpansion window_field(const Cubature& cub, int n) {
  const int L = 6 * n;
  const Eigen::VectorXd smear =
      weighted_basis_moments(L, cub.nodes.points, 4.0 * M_PI * cub.lambda);
  SHExpansion window = SHExpansion::zero(L);
  for (int l = 0; l <= L; ++l) {
    const double prof = eta_eval(static_cast<double>(l) / (3.0 * n));
    if (prof == 0.0) continue;
    const int lo = l * l, len = 2 * l + 1;
    window.coeff.segment(lo, len) = prof * smear.segment(lo, len);
  }
  return window;
}

// Two-stage search for the point whose cap carries the least weight mass.
SpherePoint cap_minimizer(const Weight& w, double radius) {
  const SeparatedSet net = build_separated_set(0.25, 20260822ULL);
  SpherePoint best = net.points.col(0);
  double best_val = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < net.size(); ++j) {
    const SpherePoint cand = net.points.col(j);
    const double val = cap_weight_integral(w, cand, radius);
    if (val < best_val) {
      best_val = val;
      best = cand;
    }
  }
  Rng rng(0xfacade5eedULL);
  double step = 0.22;
  for (int it = 0; it < 160; ++it) {
    SpherePoint cand = best + step * SpherePoint(rng.normal(), rng.normal(), rng.normal());
    cand.normalize();
    const double val = cap_weight_integral(w, cand, radius);
    if (val < best_val) {
      best_val = val;
      best = cand;
    }
    step *= 0.975;
  }
  return best;
}

}  // namespace

DyadicPieces dyadic_pieces(const SphereGrid& grid, const GridSamples& f,
                           int depth, double p) {
  if (depth < 1 || depth > 24)
    throw std::invalid_argument("dyadic_pieces: depth must be in [1, 24]");
  if (!(p > 0.0))
    throw std::invalid_argument("dyadic_pieces: p must be positive");
  const int top = 1 << depth;
  if (grid.exactness < 2 * top)
    throw std::invalid_argument(
        "dyadic_pieces: grid exactness shortfall for the requested depth");
  DyadicPieces out;
  out.depth = depth;
  const SHExpansion full = sh_transform(grid, f, top);
  out.near_best.resize(depth + 1);
  out.piece.resize(depth + 1);
  out.err_proxy.resize(depth + 1);
  out.near_best[0] = truncate_blocks(full, 1);
  for (int j = 1; j <= depth; ++j)
    out.near_best[j] = vallee_poussin(full, 1 << (j - 1));
  out.piece[0] = out.near_best[0];
  for (int j = 1; j <= depth; ++j)
    out.piece[j] = add_scaled(out.near_best[j], out.near_best[j - 1], -1.0);
  for (int j = 0; j <= depth; ++j) {
    const GridSamples approx = inverse_sh(grid, out.near_best[j]);
    out.err_proxy[j] = lp_norm_sphere(f - approx, p, grid);
  }
  return out;
}

std::vector<Cubature> sigma_cubature_family(int top_log2, std::uint64_t seed) {
  if (top_log2 < 0 || top_log2 > 3)
    throw std::invalid_argument(
        "sigma_cubature_family: top scale limited to 8 (desk-sized node solves)");
  std::vector<Cubature> fam;
  fam.reserve(top_log2 + 1);
  const Weight unit = make_unit_weight();
  for (int t = 0; t <= top_log2; ++t) {
    const int scale = 1 << t;
    // Sparsest certified-solvable density: correction norms carry a factor
    // N^{(1-p)/p}, and the decay regime starts earlier the fewer nodes the
    // window smears over, so the series ladder runs at maximal separation.
    const SeparatedSet nodes =
        build_separated_set(0.45 / scale, seed + static_cast<std::uint64_t>(t));
    fam.push_back(solve_cubature(nodes, unit, scale, 1e-9, 0.5));
  }
  return fam;
}

const Cubature& family_entry_for(const std::vector<Cubature>& family,
                                 int degree) {
  if (family.empty())
    throw std::invalid_argument("family_entry_for: empty cubature family");
  // Sparsest node set whose cubature degree covers the piece; the constants
  // in the correction bound degrade with node count, so denser is not better.
  // Pieces beyond every entry fall back to the densest one available.
  const Cubature* best = &family.front();
  for (const Cubature& cub : family) {
    if (cub.exactness_degree > best->exactness_degree) best = &cub;
    if (cub.exactness_degree >= degree) return cub;
  }
  return *best;
}

SHExpansion sigma_partial_sum(const SHExpansion& g, const Cubature& cub,
                              int k) {
  if (k < 0)
    throw std::invalid_argument("sigma_partial_sum: block index must be >= 0");
  if (g.max_degree < 0)
    throw std::invalid_argument("sigma_partial_sum: expansion is uninitialized");
  require_unit_measure(cub, "sigma_partial_sum");
  SHExpansion smear = SHExpansion::zero(k);
  smear.coeff =
      weighted_basis_moments(k, cub.nodes.points, 4.0 * M_PI * cub.lambda);
  const int prod_degree = k + g.max_degree;
  const SphereGrid grid = build_grid(2 * prod_degree);
  const GridSamples prod =
      inverse_sh(grid, g).cwiseProduct(inverse_sh(grid, smear));
  return sh_transform(grid, prod, prod_degree);
}

SHExpansion vn_sigma_piece(const SHExpansion& g, const Cubature& cub, int n) {
  if (n < 1)
    throw std::invalid_argument("vn_sigma_piece: scale must be >= 1");
  if (g.max_degree < 0)
    throw std::invalid_argument("vn_sigma_piece: expansion is uninitialized");
  require_unit_measure(cub, "vn_sigma_piece");
  const double thr = 1e-14 * std::max(1.0, g.coeff.cwiseAbs().maxCoeff());
  const int dg = actual_degree(g, thr);
  if (dg < 0) return SHExpansion::zero(0);
  if (dg > 2 * n)
    throw std::invalid_argument(
        "vn_sigma_piece: piece degree exceeds twice the scale");
  const SHExpansion window = window_field(cub, n);
  const int out_degree = 2 * n;
  const SphereGrid grid = build_grid(window.max_degree + dg + out_degree);
  const GridSamples prod =
      inverse_sh(grid, window).cwiseProduct(inverse_sh(grid, truncate_blocks(g, dg)));
  return vallee_poussin(sh_transform(grid, prod, out_degree), n);
}

SHExpansion vn_sigma_approximant(const SphereGrid& grid, const GridSamples& f,
                                 int n, double p,
                                 const std::vector<Cubature>& family) {
  if (n < 1)
    throw std::invalid_argument("vn_sigma_approximant: scale must be >= 1");
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("vn_sigma_approximant: p must lie in (0, 1)");
  if (family.empty())
    throw std::invalid_argument("vn_sigma_approximant: empty cubature family");
  if (grid.exactness < 4 * n)
    throw std::invalid_argument(
        "vn_sigma_approximant: grid exactness must cover four times the scale");
  int m = 1;
  while ((1 << m) <= n) ++m;  // 2^{m-1} <= n < 2^m
  const DyadicPieces ladder = dyadic_pieces(grid, f, m, p);
  const double ref =
      std::max(1.0, ladder.near_best[m].coeff.cwiseAbs().maxCoeff());
  SHExpansion acc =
      add_scaled(ladder.near_best[m - 1], vallee_poussin(ladder.piece[m], n), 1.0);
  for (int j = 1; j <= m; ++j) {
    const SHExpansion& g = ladder.piece[j];
    const int dg = actual_degree(g, 1e-13 * ref);
    if (dg < 0) continue;  // level carries no mass; its correction vanishes
    const Cubature& cub = family_entry_for(family, dg);
    acc = add_scaled(acc, vn_sigma_piece(truncate_blocks(g, dg), cub, n), -1.0);
  }
  return acc;
}

double modulus_estimate(const SphereGrid& grid, const GridSamples& f,
                        double t, double p, int rotation_draws,
                        std::uint64_t seed) {
  if (!(t > 0.0 && t < M_PI))
    throw std::invalid_argument("modulus_estimate: angle must lie in (0, pi)");
  if (!(p > 0.0))
    throw std::invalid_argument("modulus_estimate: p must be positive");
  if (rotation_draws < 1)
    throw std::invalid_argument("modulus_estimate: need at least one draw");
  const int L = grid.exactness / 2;
  const SHExpansion fhat = sh_transform(grid, f, L);
  const Eigen::Matrix3Xd pts = grid_points(grid);
  Rng rng(seed);
  double worst = 0.0;
  for (int draw = 0; draw < rotation_draws; ++draw) {
    Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    axis.normalize();
    const double angle = t * rng.uniform();
    const Eigen::Matrix3d R = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    const Eigen::ArrayXd vals = eval_at_points(fhat, R * pts);
    const GridSamples rotated = Eigen::Map<const GridSamples>(
        vals.data(), grid.rows(), grid.n_phi);
    worst = std::max(worst, lp_norm_sphere(rotated - f, p, grid));
  }
  return worst;
}

BesovDatum besov_norm(const SHExpansion& f, double nu, double p, double tau,
                      const Weight& w, int depth, const SphereGrid& grid) {
  if (f.max_degree < 0)
    throw std::invalid_argument("besov_norm: expansion is uninitialized");
  if (!(nu > 0.0))
    throw std::invalid_argument("besov_norm: smoothness must be positive");
  if (!(p > 0.0))
    throw std::invalid_argument("besov_norm: p must be positive");
  if (!(tau > 0.0))
    throw std::invalid_argument("besov_norm: tau must be positive");
  if (depth < 0)
    throw std::invalid_argument("besov_norm: depth must be >= 0");
  const GridSamples base = inverse_sh(grid, f);
  BesovDatum out;
  out.smoothness = nu;
  out.integrability = p;
  out.summability = tau;
  out.weight_label = w.label;
  std::vector<double> terms(depth + 1);
  for (int j = 0; j <= depth; ++j) {
    const SHExpansion appr =
        (j == 0) ? truncate_blocks(f, 1) : vallee_poussin(f, 1 << (j - 1));
    const double err =
        weighted_lp_norm(base - inverse_sh(grid, appr), p, w, grid);
    terms[j] = std::pow(2.0, j * nu) * err;
  }
  double tail = 0.0;
  if (std::isinf(tau)) {
    tail = *std::max_element(terms.begin(), terms.end());
  } else {
    for (double v : terms) tail += std::pow(v, tau);
    tail = std::pow(tail, 1.0 / tau);
  }
  out.value = weighted_lp_norm(base, p, w, grid) + tail;
  return out;
}

SharpnessTable sharpness_series(const Weight& w, double p, double q,
                                double eps, int depth) {
  if (!(p > 0.0) || !(q > p) || !std::isfinite(q))
    throw std::invalid_argument("sharpness_series: need 0 < p < q < infinity");
  const double nu = w.s_w * (1.0 / p - 1.0 / q);
  if (!(eps > 0.0 && eps < nu / 2.0))
    throw std::invalid_argument(
        "sharpness_series: margin must lie in (0, nu/2)");
  if (depth < 2 || depth > 8)
    throw std::invalid_argument("sharpness_series: depth must be in [2, 8]");

  SharpnessTable table;
  table.nu = nu;
  table.nu_prime = nu - 2.0 * eps;
  table.s_w = w.s_w;

  const int top_scale = 1 << depth;
  const SphereGrid grid = build_grid(4 * top_scale, 2);
  const Eigen::Matrix3Xd pts = grid_points(grid);

  std::vector<double> coeff(depth + 1, 0.0), pn(depth + 1, 0.0),
      qn(depth + 1, 0.0);
  std::vector<double> partial(depth + 1, 0.0);
  GridSamples accum = GridSamples::Zero(grid.rows(), grid.n_phi);
  for (int level = 1; level <= depth; ++level) {
    const int scale = 1 << level;
    const SpherePoint y = cap_minimizer(w, 1.0 / scale);
    const ZonalKernel win = build_K(3, std::max(1, scale / 2));
    const double peak = eval_zonal(win, 1.0);
    const Eigen::ArrayXd prof =
        eval_zonal(win, (pts.transpose() * y).array().min(1.0).max(-1.0)) /
        peak;
    const Eigen::ArrayXd flat = prof.square();
    const GridSamples bump =
        Eigen::Map<const GridSamples>(flat.data(), grid.rows(), grid.n_phi);
    pn[level] = weighted_lp_norm(bump, p, w, grid);
    qn[level] = weighted_lp_norm(bump, q, w, grid);
    coeff[level] = std::pow(2.0, level * (w.s_w / q + eps));
    accum += coeff[level] * bump;
    partial[level] = weighted_lp_norm(accum, q, w, grid);
  }
  const double series_pnorm = weighted_lp_norm(accum, p, w, grid);

  // tail proxies for the truncated series: the approximation error after
  // scale 2^k is controlled by the theta-sum of the remaining scaled terms
  const double theta = std::min(p, 1.0);
  std::vector<double> ehat(depth + 1, 0.0);
  for (int k = 0; k <= depth; ++k) {
    double s = 0.0;
    for (int j = k + 1; j <= depth; ++j)
      s += std::pow(coeff[j] * pn[j], theta);
    ehat[k] = std::pow(s, 1.0 / theta);
  }

  table.rows.resize(depth);
  double besov_sum = std::pow(std::pow(2.0, 0.0 * table.nu_prime) * ehat[0], q);
  for (int level = 1; level <= depth; ++level) {
    besov_sum += std::pow(std::pow(2.0, level * table.nu_prime) * ehat[level], q);
    SharpnessRow& row = table.rows[level - 1];
    row.level = level;
    row.piece_norm_p = pn[level];
    row.piece_norm_q = qn[level];
    row.term_qnorm = coeff[level] * qn[level];
    row.partial_qnorm = partial[level];
    row.besov_partial = series_pnorm + std::pow(besov_sum, 1.0 / q);
  }
  return table;
}

}  // namespace zonal
