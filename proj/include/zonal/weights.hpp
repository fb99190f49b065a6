#pragma once

// Doubling weights on S^2: normalized power weights, cap integrals, the
// scale-n mollification, weighted L^p norms, the decaying maximal function,
// and the A_p-type balance functionals over cap families.

#include "zonal/sphere.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace zonal {

enum class WeightKind { unit, power, custom };

struct Weight {
  WeightKind kind = WeightKind::unit;
  Eigen::Vector3d exponents = Eigen::Vector3d::Zero();   // power weights only
  std::function<double(const SpherePoint&)> raw;         // custom weights only
  double normalizer = 1.0 / (4.0 * M_PI);  // multiplies the raw value; mass 1
  double s_w = 2.0;                        // dyadic growth exponent
  double doubling_constant_estimate = 4.0;
  std::string label = "unit";

  double operator()(const SpherePoint& x) const;
};

Weight make_unit_weight();

// w(x) proportional to prod |x_j|^{a_j}, normalized to unit mass; s_w takes
// its closed-form value 2 + sum(a) - min(a).
Weight make_power_weight(const Eigen::Vector3d& exponents);

// Arbitrary positive evaluator; mass normalized by quadrature, s_w estimated
// as the sup of dyadic cap-growth logs plus a small margin.
Weight make_custom_weight(std::function<double(const SpherePoint&)> raw,
                          const std::string& label);

// "unit" or "power:a1,a2,a3".
Weight parse_weight(const std::string& spec);

// Unnormalized total mass of prod |x_j|^{a_j} over S^2 (closed form).
double power_weight_mass(const Eigen::Vector3d& exponents);

// Integral of the normalized weight over a cap.  Power weights split the
// quadrature panels where the cap crosses the coordinate great circles and
// absorb the |x_j|^{a_j} endpoint exponents into Gauss-Jacobi weights;
// everything refines by order doubling to ~1e-8 relative accuracy.
// Throws std::runtime_error if the refinement ladder fails to converge.
double cap_weight_integral(const Weight& w, const SpherePoint& center,
                           double radius);

// Mollified value n^2 * integral of w over B(x, 1/n).
double mollified_value(const Weight& w, int n, const SpherePoint& x);

struct MollifiedWeight {
  Weight base;
  int n = 1;
  SphereGrid grid;
  GridSamples values;  // mollified values cached at the grid nodes
};

MollifiedWeight mollify(const Weight& w, int n, const SphereGrid& grid);

GridSamples sample_weight(const Weight& w, const SphereGrid& grid);

// (int |f|^p w dsigma)^{1/p} over the grid; p = infinity means the max.
double weighted_lp_norm(const GridSamples& f, double p, const Weight& w,
                        const SphereGrid& grid);
double weighted_lp_norm(const GridSamples& f, double p,
                        const MollifiedWeight& wn);

// Discrete max over the grid of |f(y)| (1 + n rho(x,y))^{-xi}, at every node.
GridSamples maximal_function(const GridSamples& f, int n, double xi,
                             const SphereGrid& grid);

struct Cap {
  SpherePoint center;
  double radius = 0.0;
};

// Caps centered at the coordinate poles with dyadic radii 2^{-i}; the cap
// family that witnesses the degeneracy of the power weights.  The default
// depth reaches radii well below the finest mollification scale the sweeps
// use, so the family pins the supremum on both sides of the threshold order.
std::vector<Cap> degeneracy_cap_family(int radii_per_center = 12);

// Per-cap balance data at scale n (independent of the order r).
struct CapBalance {
  double radius = 0.0;
  double area = 0.0;     // surface measure of the cap
  double wn_mass = 0.0;  // integral of the mollified weight over the cap
  double balance = 0.0;  // (avg of w_n^{-1/(p-1)})^{p-1}, or 1/inf w_n at p=1
};

std::vector<CapBalance> ap_cap_data(const Weight& w, double p, int n,
                                    const std::vector<Cap>& caps);

// Balance quantity max over caps of
//   (w_n(B)/|B|) * ((1/|B|) int_B w_n^{-1/(p-1)})^{p-1} * (1+n|B|^{1/2})^{-rp}
// with the inf-based variant at p = 1.
double ap_tau_from_data(const std::vector<CapBalance>& data, double p, double r,
                        int n);
double ap_tau_quantity(const Weight& w, double p, double r, int n,
                       const std::vector<Cap>& caps);

// Threshold order s_w/p - 2 below which the balance quantity blows up for
// power weights.
double power_tau(const Weight& w, double p);

}  // namespace zonal
