#pragma once

// One-dimensional Jacobi layer: three-term recurrences, normalized zonal
// kernel values E_k, Gauss rules for the trigonometric weight
//   (sin(theta/2))^(2a+1) (cos(theta/2))^(2b+1) dtheta   on [0, pi],
// and weighted L^p norms against that measure.

#include <Eigen/Dense>

#include <functional>

namespace zonal {

// Parameter pair (alpha, beta) with alpha >= beta >= -1/2.
struct JacobiParams {
  double alpha = 0.0;
  double beta = 0.0;

  JacobiParams() = default;
  JacobiParams(double a, double b);
  double sum() const { return alpha + beta; }
};

// Gamma(num)/Gamma(den) evaluated in the log domain. Both arguments must be
// positive; throws std::range_error if the result overflows a double.
double gamma_ratio(double num, double den);

// P_k^{(alpha,beta)}(t) by the forward three-term recurrence.
double jacobi_poly(const JacobiParams& pr, int k, double t);
Eigen::ArrayXd jacobi_poly(const JacobiParams& pr, int k, const Eigen::ArrayXd& t);

// Multiplier nu_k with E_k = nu_k * P_k^{(alpha,beta)}:
//   nu_k = (2k+a+b+1) * Gamma(k+a+b+1) / Gamma(k+b+1).
double kernel_norm_factor(const JacobiParams& pr, int k);

// Normalized kernel value E_k^{(alpha,beta)}(t).
double kernel_E(const JacobiParams& pr, int k, double t);
Eigen::ArrayXd kernel_E(const JacobiParams& pr, int k, const Eigen::ArrayXd& t);

// E_k at the right endpoint t = 1 (uses the closed form for P_k(1)).
double kernel_E_at_one(const JacobiParams& pr, int k);

// sum_k w[k] * P_k^{(alpha,beta)}(t), fused with the recurrence.
double jacobi_series(const JacobiParams& pr, const Eigen::VectorXd& w, double t);
Eigen::ArrayXd jacobi_series(const JacobiParams& pr, const Eigen::VectorXd& w,
                             const Eigen::ArrayXd& t);

// Same sum carried in extended precision.  The plain-double recurrence leaves
// cancellation noise of order degree * eps * max|sum|, which buries the deep
// tail of a sharply localized series; this variant pushes that floor down by
// roughly three decades at the cost of scalar (non-vectorized) evaluation.
Eigen::ArrayXd jacobi_series_ext(const JacobiParams& pr, const Eigen::VectorXd& w,
                                 const Eigen::ArrayXd& t);

// m-point Gauss rule for the weight (1-x)^a (1+x)^b on [-1,1]
// (Golub-Welsch on the symmetric tridiagonal recurrence matrix).
void gauss_jacobi(double a, double b, int m, Eigen::ArrayXd& x, Eigen::ArrayXd& w);

// Gauss-Legendre shorthand.
void gauss_legendre(int m, Eigen::ArrayXd& x, Eigen::ArrayXd& w);

// Quadrature rule on [0,pi] for the trigonometric weight above, exact for
// polynomials in cos(theta) up to degree `exactness`.
struct QuadratureRule1D {
  Eigen::ArrayXd theta;   // ascending nodes in (0, pi)
  Eigen::ArrayXd weight;  // weights incorporating the measure
  int exactness = 0;
};

QuadratureRule1D gauss_jacobi_rule(const JacobiParams& pr, int target_degree,
                                   int oversample = 1);

// Batch evaluator in the variable t = cos(theta).
using BatchFn = std::function<Eigen::ArrayXd(const Eigen::ArrayXd&)>;

struct NormOptions {
  double tol = 0.0;         // 0 selects the default: 1e-6, or 1e-5 for p < 0.5
  int osc_degree = 1;       // oscillation scale of g (panel density follows it)
  int panels_per_osc = 8;
  int gauss_order = 8;
  int max_doublings = 11;
  bool split_zeros = false; // split panels at sign changes of g and absorb the
                            // |g|^p endpoint exponents into Gauss-Jacobi rules
  double noise_floor = 0.0; // relative amplitude below which values of g count
                            // as evaluation roundoff (split engine only);
                            // 0 selects a model for plain double evaluation
};

// ( Int_0^pi |g(cos theta)|^p (sin(theta/2))^(2a+1)(cos(theta/2))^(2b+1) dtheta )^(1/p).
// Composite panels with doubling until the relative change drops below tol;
// throws std::runtime_error if the resolution cap is reached unconverged.
double weighted_norm_1d(const BatchFn& g, double p, const JacobiParams& pr,
                        NormOptions opt = {});

// Total mass of the trigonometric weight: Gamma(a+1)Gamma(b+1)/Gamma(a+b+2).
double trig_weight_mass(const JacobiParams& pr);

}  // namespace zonal
