#pragma once

// Sphere-side infrastructure (concrete transforms for S^2): geodesic
// geometry, cap measures, product quadrature grids, real spherical-harmonic
// transforms, greedy maximal separated point sets, and flat-text
// serialization with certificate re-validation.

#include "zonal/jacobi.hpp"
#include "zonal/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

namespace zonal {

using SpherePoint = Eigen::Vector3d;  // unit vectors throughout

bool is_unit(const SpherePoint& x, double tol = 1e-10);

// Geodesic distance arccos(<x,y>), inner product clamped to [-1,1].
double geodesic(const SpherePoint& x, const SpherePoint& y);

// Total surface area of S^(d-1); d = 1 gives the two-point sphere.
double sphere_area(int d);

// Surface measure of a spherical cap of given geodesic radius on S^(d-1);
// closed form for d = 3, meridian quadrature otherwise.
double cap_measure(double radius, int d = 3);

// Product quadrature grid on S^2: polar nodes (with weights in cos(theta))
// times a uniform azimuth.  exactness >= 0 certifies that all spherical
// polynomials up to that degree integrate exactly; exactness = -1 marks a
// special-purpose rule (see zonal_adapted_grid) carrying no such certificate.
struct SphereGrid {
  Eigen::ArrayXd theta;         // ascending polar nodes in (0, pi)
  Eigen::ArrayXd polar_weight;  // positive weights for integration in cos(theta)
  int n_phi = 0;
  int exactness = 0;

  Eigen::Index rows() const { return theta.size(); }
  Eigen::Index node_count() const { return theta.size() * n_phi; }
  double phi(int j) const { return 2.0 * M_PI * j / n_phi; }
  SpherePoint node(int i, int j) const;
  // Quadrature weight attached to every node in polar row i.
  double node_weight(int i) const {
    return polar_weight[i] * 2.0 * M_PI / n_phi;
  }
};

// Gauss-Legendre polar rule times uniform azimuth, exact on spherical
// polynomials up to `exactness`; oversample inflates the node counts in both
// directions for non-polynomial integrands (|f|^p with p < 1).
SphereGrid build_grid(int exactness, int oversample = 1);

// Samples on a grid, rows = polar index, cols = azimuth index.
using GridSamples = Eigen::MatrixXd;

double grid_integral(const SphereGrid& grid, const GridSamples& samples);

// L^p norm against the (unnormalized) surface measure; p may be infinity.
double lp_norm_sphere(const GridSamples& samples, double p,
                      const SphereGrid& grid);

GridSamples sample_zonal(const SphereGrid& grid, const ZonalKernel& kern,
                         const SpherePoint& axis);
GridSamples sample_pointwise(
    const SphereGrid& grid, const std::function<double(const SpherePoint&)>& f);

// Polar quadrature rule adapted to |F(cos theta)|^p for a fixed zonal F:
// panels split at the sign changes of F, with the cusp exponents absorbed
// into the weights.  `weight` integrates in t = cos(theta) (so that
// sum_k weight_k * g(theta_k) ~ int_{-1}^{1} g dt for g = |F|^p * smooth).
struct PolarRule {
  Eigen::ArrayXd theta;
  Eigen::ArrayXd weight;
};

PolarRule zonal_split_rule(const ZonalKernel& kern, double p, int order = 48);

// SphereGrid wrapper around zonal_split_rule (exactness = -1): an S^2
// quadrature whose polar nodes resolve the cusps of |kern|^p along the axis
// direction.  Valid for zonal integrands aligned with the polar axis.
SphereGrid zonal_adapted_grid(const ZonalKernel& kern, double p,
                              int order = 48, int n_phi = 4);

// Independent ambient-variable route: ||F(<.,e>)||_{L^p(S^2)} computed as
// (2 pi int_{-1}^{1} |F|^p dt)^{1/p} with panel-order doubling until the
// relative change drops below tol.
double lp_norm_zonal_ambient(const ZonalKernel& kern, double p,
                             double tol = 1e-9);

// Real orthonormal spherical harmonics on S^2, coefficients indexed l*l+l+m.
struct SHExpansion {
  int max_degree = -1;
  Eigen::VectorXd coeff;

  static SHExpansion zero(int max_degree);
  double& at(int l, int m) { return coeff[l * l + l + m]; }
  double at(int l, int m) const { return coeff[l * l + l + m]; }
  double l2_norm() const { return coeff.norm(); }
};

// Normalized associated Legendre values for fixed order m and all degrees
// l = m..L (rows) at the given abscissas (cols); orthonormal on [-1,1].
Eigen::MatrixXd legendre_table(int L, int m, const Eigen::ArrayXd& x);

// All basis values Y_{l,m}(x), l <= L, packed like SHExpansion coefficients.
Eigen::VectorXd sh_basis_vector(int L, const SpherePoint& x);
double sh_basis(int l, int m, const SpherePoint& x);

// Basis values at many points at once: rows = packed (l,m) index, cols =
// points; batched over the Legendre order.
Eigen::MatrixXd sh_basis_matrix(int L, const Eigen::Matrix3Xd& pts);

// Forward transform (requires grid exactness >= 2*max_degree) and synthesis
// (valid on any node set, including adapted grids).
SHExpansion sh_transform(const SphereGrid& grid, const GridSamples& samples,
                         int max_degree);
GridSamples inverse_sh(const SphereGrid& grid, const SHExpansion& f);
double sh_eval(const SHExpansion& f, const SpherePoint& x);

// Expansion of x -> kern(<x, axis>); kernel parameters must be (0,0), the
// zonal basis matching S^2.
SHExpansion zonal_to_expansion(const ZonalKernel& kern, const SpherePoint& axis);

// Synthesis followed by the sampled norm.
double lp_norm_sphere(const SHExpansion& f, double p, const SphereGrid& grid);

// Greedy farthest-point maximal separated set.  Separation >= epsilon holds
// exactly by construction; the covering radius is certified against a
// candidate grid of resolution finer than epsilon/4 (augmented with the
// antipodes of chosen points).
struct SeparatedSet {
  Eigen::Matrix3Xd points;
  double epsilon = 0.0;
  double covering_radius = 0.0;
  bool maximal = false;

  Eigen::Index size() const { return points.cols(); }
};

SeparatedSet build_separated_set(double epsilon, std::uint64_t seed);

// Exact minimum pairwise geodesic distance (quadratic scan).
double min_pairwise_separation(const Eigen::Matrix3Xd& points);

// Flat-text round trips: header with the certificate metadata, then one node
// per line; loaders re-validate the certificates and throw on violation.
void save_point_set(const std::string& path, const SeparatedSet& set);
SeparatedSet load_point_set(const std::string& path);

void save_grid(const std::string& path, const SphereGrid& grid);
SphereGrid load_grid(const std::string& path);

}  // namespace zonal
