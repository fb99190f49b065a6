#pragma once

// Localized zonal kernels: smooth cutoffs, the fractional-symbol family
// G_{n,r}, normalized approximate-identity kernels, Cesaro kernels, and the
// summation-by-parts change of basis used to expose kernel localization.

#include "zonal/jacobi.hpp"

#include <Eigen/Dense>

#include <string>

namespace zonal {

// Smooth cutoff: 1 on [0,1], 0 on [2,inf), exp-based glue in between.
double eta_eval(double x);
Eigen::ArrayXd eta_eval(const Eigen::ArrayXd& x);

// Dyadic ring cutoff psi(x) = eta(x/2) - eta(x); supported on [1,4].
double psi_eval(double x);

enum class CutoffKind { eta, psi };
double cutoff_eval(CutoffKind kind, double x);

// Finite zonal expansion sum_k coeff[k] * E_k^{(alpha,beta)}(t).
struct ZonalKernel {
  JacobiParams params;
  Eigen::VectorXd coeff;  // E-basis coefficients, index k = 0..degree()
  std::string label;

  int degree() const { return static_cast<int>(coeff.size()) - 1; }
};

double eval_zonal(const ZonalKernel& kern, double t);
Eigen::ArrayXd eval_zonal(const ZonalKernel& kern, const Eigen::ArrayXd& t);

// G_{n,r}: coefficients eta(k/n) * (k(k+alpha+beta+1))^(r/2), k <= 2n.
ZonalKernel build_G(const JacobiParams& pr, int n, double r);

// Normalized smooth partial-sum kernel on S^(d-1) (alpha = beta = (d-3)/2),
// scaled so that the kernel integrates to 1 against the surface measure.
ZonalKernel build_K(int d, int n);

// Same kernel without the surface normalization (leading coefficient 1).
ZonalKernel build_K_raw(int d, int n);

// Cesaro (C,delta) kernel of degree n: coefficients A_{n-k}^delta / A_n^delta.
ZonalKernel build_cesaro(const JacobiParams& pr, int n, double delta);

// Cesaro number A_k^delta = Gamma(k+delta+1)/(Gamma(k+1)Gamma(delta+1)).
double cesaro_number(double delta, int k);

// Weighted L^p norm of the kernel against the trigonometric measure of its
// own parameters; oscillation degree is taken from the kernel.
double kernel_norm(const ZonalKernel& kern, double p, NormOptions opt = {});

// Summation-by-parts coefficients a_{n,r,j}(s) on the integer grid s = 0..smax.
Eigen::VectorXd sbp_coefficients(const JacobiParams& pr, int n, double r, int j,
                                 int smax);

// Leading asymptotic constant gamma_{r,j} of a_{n,r,j}.
double sbp_gamma(double r, int j);

// Rewrites G_{n,r} against the raised-parameter basis (alpha+ell, beta); the
// overall scale is fitted numerically and reported, never asserted.
struct SbpRepresentation {
  ZonalKernel kernel;      // coefficients b_k in the (alpha+ell, beta) basis
  int ell = 0;
  double fitted_scale = 0.0;
  double max_rel_error = 0.0;  // reconstruction error on the probe grid
};

SbpRepresentation sbp_representation(const JacobiParams& pr, int n, double r);

}  // namespace zonal
