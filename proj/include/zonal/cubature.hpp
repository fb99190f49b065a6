#pragma once

// Positive weighted cubature on separated node sets: nonnegative node
// weights matching every spherical-harmonic moment of a doubling weight up
// to a target degree, plus the discrete-vs-continuous norm comparison for
// random polynomial samples.

#include "zonal/sphere.hpp"
#include "zonal/weights.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace zonal {

struct Cubature {
  SeparatedSet nodes;
  Eigen::VectorXd lambda;   // nonnegative node weights, one per column of nodes
  int exactness_degree = 0;
  Weight weight_fn;
  double residual = 0.0;    // certified max moment defect (held-out harmonics included)
};

// Real SH moments of w up to max_degree, packed like SHExpansion.coeff.
// Octant-panel tensor quadrature with the |x_j|^{a_j} great-circle factors
// absorbed into Gauss-Jacobi weights, refined by order doubling to ~1e-12;
// custom weights must be smooth away from the coordinate planes.
// Throws std::runtime_error if the refinement ladder fails to converge.
Eigen::VectorXd weighted_moments(const Weight& w, int max_degree);

// Nonnegative weights lambda with sum(lambda_o Y(o)) = integral(Y w dsigma)
// for every real SH of degree <= 4n.  Requires node separation <= delta0/n.
// Warm start at the cap masses w(B(o, 1/n)); the moment correction runs in
// cap-mass-scaled variables (minimal-norm step via a Cholesky solve of the
// scaled Gram matrix) with clipping of negative weights between passes.  The
// certified residual additionally checks held-out rotated harmonics that are
// not rows of the solve.  Throws std::runtime_error with a hint to densify
// the nodes if the residual tolerance cannot be met.
Cubature solve_cubature(const SeparatedSet& nodes, const Weight& w, int n,
                        double residual_tol = 1e-9, double delta0 = 0.3);

// Discrete-vs-continuous weighted L^p norm ratios over random degree-n
// expansions with iid standard normal coefficients (n = exactness/4, the
// scale the cubature was built for).  Finite p only.
struct MZStats {
  Eigen::ArrayXd ratios;  // discrete / continuous, one entry per sample
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

MZStats mz_check(const Cubature& cub, double p, int samples = 100,
                 std::uint64_t seed = 1234);

// Flat-text round trip (unit and power weights only): point-set certificate
// header plus the residual certificate, one "x y z lambda" row per node.
// The loader revalidates separation, nonnegativity, and the moment defect.
void save_cubature(const std::string& path, const Cubature& cub);
Cubature load_cubature(const std::string& path);

}  // namespace zonal
