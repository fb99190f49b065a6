#pragma once

// Constructive L^p approximation for sub-unity integrability: dyadic
// near-best ladders, node-seeded series approximants built from positive
// cubature, rotation moduli, dyadic-smoothness quasi-norms, and the
// critical-index embedding diagnostics with doubling weights.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zonal/cubature.hpp"
#include "zonal/sphere.hpp"
#include "zonal/weights.hpp"

namespace zonal {

// Near-best dyadic ladder.  near_best[j] lies in the degree-2^j polynomial
// space: the head (j = 0) is the degree-1 projection, and level j >= 1 is the
// smooth truncation at scale 2^{j-1}, which lands in degree 2^j and is a
// near-best approximant for every 0 < p <= infinity.  piece[j] are the
// consecutive differences (piece[0] = the head), so the ladder telescopes:
// near_best[J] = sum of piece[0..J].  err_proxy[j] records the sampled
// p-(quasi)norm of f - near_best[j], an upper proxy for the degree-2^j best
// approximation error.
struct DyadicPieces {
  int depth = 0;
  std::vector<SHExpansion> near_best;
  std::vector<SHExpansion> piece;
  std::vector<double> err_proxy;
};

// Build the ladder from samples.  Requires depth >= 1 and grid exactness
// >= 2^{depth+1} (alias-free transforms of every level); supply an
// oversampled grid when p < 1 so the error proxies resolve |.|^p cusps.
DyadicPieces dyadic_pieces(const SphereGrid& grid, const GridSamples& f,
                           int depth, double p);

// Unit-measure positive cubature ladder at scales 1, 2, ..., 2^top_log2 for
// the series constructions; the entry at scale s has polynomial exactness 4s
// on the sparsest certified-solvable node sets (separation 0.45/s) — series
// correction constants degrade with node count, so sparse beats dense here.
// top_log2 is capped at 3 (scale 8), the range where the node solves stay
// desk-sized.  Deterministic in seed.
std::vector<Cubature> sigma_cubature_family(int top_log2, std::uint64_t seed);

// Smallest family entry whose exactness covers the given degree — the
// correction constants degrade with node count, so the sparsest adequate set
// wins.  Degrees beyond every entry get the densest one available (the
// desk-scale stand-in for an unbounded ladder); an empty family throws.
const Cubature& family_entry_for(const std::vector<Cubature>& family,
                                 int degree);

// Partial sum through block k of the node-seeded series for g.  The series
// multiplies g by the cubature smearing of each projection kernel; exactness
// makes every smearing of blocks 1..k vanish identically and the zeroth
// smearing equal one, so the partial sum reproduces g whenever the cubature
// is exact to degree max(k, deg g).  Returned with enough coefficient room
// for the full product, so the comparison against g is direct.
SHExpansion sigma_partial_sum(const SHExpansion& g, const Cubature& cub,
                              int k);

// One correction term of the truncated-series approximant: the smooth
// truncation at n of g times the node-smeared window field of width 3n
// (profile eta(l/3n) applied to the cubature moments of the basis).  The
// closed form is intended for n >= deg g; deg g <= 2n is required.
SHExpansion vn_sigma_piece(const SHExpansion& g, const Cubature& cub, int n);

// Full approximant at scale n for 0 < p < 1: with m the dyadic level of n
// (2^{m-1} <= n < 2^m), assembles
//   near_best[m-1] + smooth-truncation-at-n of piece[m]
//                  - sum over j = 1..m of the piece corrections,
// choosing for each piece the smallest family entry exact to its degree.
// Requires grid exactness >= 4n (alias-free ladder to level m).
SHExpansion vn_sigma_approximant(const SphereGrid& grid, const GridSamples& f,
                                 int n, double p,
                                 const std::vector<Cubature>& family);

// Certified lower bound for the first-order rotation modulus at angle t:
// max over sampled rotations (uniform axes, angles scaled by t) of
// ||f o rho - f||_p, with both norms sampled on the supplied grid.  The same
// seed draws nested rotation sets as draws grow, so the estimate is
// monotone in rotation_draws and stabilizes under doubling.
double modulus_estimate(const SphereGrid& grid, const GridSamples& f,
                        double t, double p, int rotation_draws,
                        std::uint64_t seed = 424242);

// Dyadic-smoothness quasi-norm record.
struct BesovDatum {
  double smoothness = 0.0;     // nu
  double integrability = 0.0;  // p
  double summability = 0.0;    // tau (infinity means the sup variant)
  std::string weight_label;
  double value = 0.0;
};

// ||f||_{p,w} + (sum_{j<=J} (2^{j nu} E_{2^j})^tau)^{1/tau} with E_{2^j} the
// sampled near-best proxies (degree-1 projection at j = 0, smooth truncation
// at 2^{j-1} above); tau = infinity takes the sup of the terms.  Norms are
// sampled on the supplied grid.
BesovDatum besov_norm(const SHExpansion& f, double nu, double p, double tau,
                      const Weight& w, int depth, const SphereGrid& grid);

// One level of the divergence-witness series.
struct SharpnessRow {
  int level = 0;            // dyadic level; the term lives at scale 2^level
  double piece_norm_p = 0;  // weighted p-norm of the localized bump
  double piece_norm_q = 0;  // weighted q-norm of the localized bump
  double term_qnorm = 0;    // scaled q-norm contribution of this term
  double partial_qnorm = 0; // weighted q-norm of the series through level
  double besov_partial = 0; // reduced-smoothness quasi-norm through level
};

struct SharpnessTable {
  double nu = 0.0;        // critical smoothness s_w (1/p - 1/q)
  double nu_prime = 0.0;  // reduced smoothness nu - 2 eps
  double s_w = 0.0;
  std::vector<SharpnessRow> rows;
};

// Divergence witness for the critical embedding index: positive localized
// bumps (squared window kernels, sup-normalized) centered at the minimizers
// of the cap mass w(B(., 2^-level)) found by two-stage search, summed with
// coefficients 2^{level s_w/q} 2^{level eps}.  The q-norm partial sums grow
// like 2^{level eps} while the reduced-smoothness quasi-norm partial sums
// stay Cauchy.  Requires 0 < p < q < infinity and 0 < eps < nu/2.
SharpnessTable sharpness_series(const Weight& w, double p, double q,
                                double eps, int depth);

}  // namespace zonal
