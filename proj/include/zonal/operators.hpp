#pragma once

// Spectral operators on spherical-harmonic expansions (projections,
// fractional Laplacian powers, smooth truncation, Cesaro means),
// best-approximation brackets, growth-rate predictions, and Bernstein-ratio
// sweeps over polynomial ensembles.

#include "zonal/kernels.hpp"
#include "zonal/sphere.hpp"
#include "zonal/weights.hpp"

#include <cstdint>
#include <vector>

namespace zonal {

// Component of f of exact degree k (all other degrees dropped).
SHExpansion project(const SHExpansion& f, int k);

// Fractional Laplacian power: the degree-k coefficients are scaled by
// (k(k+1))^{r/2}; constants are annihilated for r > 0.
SHExpansion frac_laplace(const SHExpansion& f, double r);

// Zonal path: coefficient k is scaled by (k(k+s+1))^{r/2} with s the sum of
// the kernel's basis parameters.
ZonalKernel frac_laplace(const ZonalKernel& kern, double r);

// Smooth truncation: degree-k coefficients scaled by eta(k/n).  Reproduces
// every expansion of degree <= n and kills all degrees > 2n.
SHExpansion vallee_poussin(const SHExpansion& f, int n);

// Cesaro mean of order delta of the partial sums up to degree n.
SHExpansion cesaro_mean(const SHExpansion& f, int n, double delta);

struct ApproxBracket {
  double lower = 0.0;
  double upper = 0.0;
};

// Distance from f to the polynomials of degree <= n in L^p.  At p = 2 both
// ends equal the exact tail energy.  Otherwise upper is the error of the
// admissible competitor obtained by smooth truncation at scale n/2 (a true
// upper bound) and lower is the smooth-truncation error at scale n, which
// undershoots the distance by at most a fixed constant.
ApproxBracket best_approx(const SHExpansion& f, int n, double p,
                          const SphereGrid& grid);

enum class RateRegime { supercritical, critical, subcritical, even_integer };

struct RegimePrediction {
  double exponent = 0.0;
  double log_power = 0.0;
  RateRegime regime = RateRegime::supercritical;
  // Value of r at which the growth law switches branch.
  double critical_threshold = 0.0;
  // max{p, (d-1+pr)/(d-1)} for the ambient dimension of the mode.
  double aq_index = 0.0;
};

// Predicted growth order of sup ||(-Lap)^{r/2} f||_p / ||f||_p over degree-n
// polynomials: n^exponent * (log n)^log_power.
//
// Unweighted mode on the sphere S^(d-1): the branch point is
// (d-1)(1/p - 1); the critical branch carries log power 1/p; even integer r
// always lands on the plain n^r law.
RegimePrediction predict_rate_unweighted(double p, double r, int d);

// One-dimensional trigonometric mode with parameter alpha: branch point
// (2*alpha+2)(1/p - 1), log power 1/p on the critical branch.
RegimePrediction predict_rate_jacobi(double p, double r, double alpha);

// Doubling-weight mode with growth exponent s_w on S^(d-1): branch point
// s_w/p - (d-1) for p <= 1 and (s_w - (d-1))/p for p > 1; the critical
// branch carries log power max{1/p, 1}.
RegimePrediction predict_rate_doubling(double p, double r, double s_w, int d);

enum class Ensemble { zonal_extremal, random_coefficients };

struct SweepOptions {
  int draws = 64;            // random-ensemble size per scale
  std::uint64_t seed = 2026;
  int oversample = 2;        // grid inflation for the sampled norms
};

struct SweepRow {
  int n = 0;
  double max_ratio = 0.0;  // max over the ensemble at this scale
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double fitted_slope = 0.0;  // log-log fit over the top half of the scales
};

// Ratio table n -> max_f ||(-Lap)^{r/2} f||_{p,w} / ||f||_{p,w} over the
// chosen ensemble of degree-n polynomials, plus the fitted slope.  The
// zonal-extremal ensemble uses the smooth truncation kernel and its
// fractional image, evaluated through adaptive 1-D quadrature for the unit
// weight and through sampled grids (kernel axes at a degenerate and a
// generic probe point) otherwise.  n_list must be dyadic (each scale twice
// the previous one).
SweepResult bernstein_sweep(Ensemble ensemble, double p, double r,
                            const Weight& w, const std::vector<int>& n_list,
                            const SweepOptions& opt = {});

}  // namespace zonal
