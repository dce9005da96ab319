#pragma once

#include <array>
#include <memory>
#include <vector>

#include "owell/common.hpp"
#include "owell/grid.hpp"

namespace owell {

// Potential vanishing exactly on the closed ball of radius well_radius and
// growing like the squared distance to it, capped at `scale`.
struct PotentialSpec {
  double well_radius = 1.0;  // r_Omega
  double scale = 1.0;        // V0 >= 0
  double tilde_radius = 1.6; // r of the enlarged neighborhood OmegaTilde

  double value(double r) const {
    double d = r - well_radius;
    if (d <= 0.0) return 0.0;
    double d2 = d * d;
    return scale * (d2 < 1.0 ? d2 : 1.0);
  }

  void validate(double half_extent) const;
};

// Parabolic bump of `height` on the ball B(center, radius); nonpositive
// outside, flattening to -outside_depth.
struct ObstacleSpec {
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double radius = 0.5;        // r_phi
  double height = 0.1;        // c_phi > 0
  double outside_depth = 0.0; // c_neg >= 0

  double value(double dist2_from_center) const {
    double s = dist2_from_center / (radius * radius);
    if (s <= 1.0) return height * (1.0 - s);
    double e = s - 1.0;
    return -outside_depth * (e < 1.0 ? e : 1.0);
  }

  void validate(const PotentialSpec& pot) const;
};

enum class NonlinVariant { PowerCritical, ExpCritical };

class ExpPrimitiveTable; // cumulative primitive of nu t^p e^(alpha0 t^2)

// The nonlinear term f and its primitive F. PowerCritical is the Sobolev
// critical form in dimension 3; ExpCritical the exponential-critical form in
// dimension 2.
struct NonlinearitySpec {
  NonlinVariant variant = NonlinVariant::PowerCritical;
  int dim = 3;

  // PowerCritical
  double mu = 1.0;
  double q = 4.0;

  // ExpCritical
  double nu = 1.0;
  double p = 3.0;
  double alpha0 = 1.0;
  double theta = 4.0;

  static NonlinearitySpec power_critical(int dim, double mu, double q);
  static NonlinearitySpec exp_critical(int dim, double nu, double p, double alpha0,
                                       double theta);

  double two_star() const { return 2.0 * dim / (dim - 2.0); }

  double f(double t) const;
  double fprime(double t) const;
  double F(double t) const; // +inf on exponential overflow

  // growth-condition exponent used in norm and superquadraticity bounds:
  // q for PowerCritical, theta for ExpCritical
  double superquadratic_exponent() const {
    return variant == NonlinVariant::PowerCritical ? q : theta;
  }

  // largest t with f(t)/t <= bound (monotone bisection)
  double small_slope_threshold(double bound) const;

  // empirical sup of |f'(t)| e^(-alpha0 t^2), recorded as a diagnostic
  double f3_empirical_constant() const;

private:
  std::shared_ptr<const ExpPrimitiveTable> table_;
  void validate_and_finish();
};

// Pair (a, k): h switches from f to linear growth t/k at the splice point a
// where f(a) = a/k.
struct TruncationParams {
  double k = 0.0;
  double a = 0.0;
};

TruncationParams truncation_build(const NonlinearitySpec& nl);

// h and its primitive H
double h_eval(const NonlinearitySpec& nl, const TruncationParams& tp, double t);
double H_eval(const NonlinearitySpec& nl, const TruncationParams& tp, double t);

// g(x,t) and G(x,t); the spatial dependence enters only through membership
// in OmegaTilde
double g_eval(const NonlinearitySpec& nl, const TruncationParams& tp, bool in_tilde,
              double t);
double G_eval(const NonlinearitySpec& nl, const TruncationParams& tp, bool in_tilde,
              double t);
// generalized derivative of g in t; the splice point takes the linear branch
double gprime_eval(const NonlinearitySpec& nl, const TruncationParams& tp,
                   bool in_tilde, double t);

// node-indexed forms matching the masks
double g_eval(std::size_t node, double t, const TruncationParams& tp,
              const RegionMask& omega_tilde, const NonlinearitySpec& nl);
double G_eval(std::size_t node, double t, const TruncationParams& tp,
              const RegionMask& omega_tilde, const NonlinearitySpec& nl);

} // namespace owell
