#pragma once

#include <memory>
#include <vector>

#include "owell/grid.hpp"
#include "owell/model.hpp"

namespace owell {

// Everything defining the penalized functional: grid, potential, obstacle,
// nonlinearity with its truncation, and the parameters lambda and epsilon.
struct ProblemSpec {
  std::shared_ptr<const GridSpec> grid;
  PotentialSpec potential;
  ObstacleSpec obstacle;
  NonlinearitySpec nonlin;
  TruncationParams trunc;
  double lam = 1.0;
  double eps = 1e-2;

  // nodal data resolved once at construction
  std::vector<double> V;          // potential samples
  std::vector<double> phi;        // obstacle samples
  Field phi_plus;                 // (phi)^+, a valid zero-boundary field
  RegionMask omega, omega_tilde, supp_obstacle;
  std::vector<double> one_lam_V;  // 1 + lam V
  std::vector<double> w_one_lam_V;// weight * (1 + lam V)
  std::vector<double> w_omega;    // weight * chi_Omega
  double phi_l2_omega = 0.0;      // quadrature L2 norm of phi over Omega

  static ProblemSpec build(std::shared_ptr<const GridSpec> grid, PotentialSpec pot,
                           ObstacleSpec obs, NonlinearitySpec nl, double lam,
                           double eps);

  ProblemSpec with_eps(double new_eps) const;
  ProblemSpec with_lambda(double new_lam) const;

  double norm_lam_sq(const Field& u) const;
  double norm_lam(const Field& u) const;
  bool in_tilde(std::size_t node) const { return omega_tilde.inside[node] != 0; }
};

struct EnergyBreakdown {
  double quadratic = 0.0; // 1/2 ||u||_lam^2
  double penalty = 0.0;   // 1/(2 eps) int_Omega [(phi-u)^+]^2
  double nonlinear = 0.0; // int G(x,u)
  double total = 0.0;     // quadratic + penalty - nonlinear
};

// throws SolverFailure when G overflows (reports max |u|)
EnergyBreakdown energy(const Field& u, const ProblemSpec& ps);

// non-throwing variant used inside line searches: total may be non-finite
EnergyBreakdown energy_unchecked(const Field& u, const ProblemSpec& ps);

// nodewise -Lap u + (1+lam V)u - (1/eps)(phi-u)^+ chi_Omega - g(x,u); the
// quadrature-weighted residual is the exact gradient of the energy
Field residual(const Field& u, const ProblemSpec& ps);

// quadrature pairing sum w r v; equals the directional derivative of energy
double weighted_pairing(const Field& r, const Field& v);

// <P(u), v> = -int_Omega (phi-u)^+ v
double penalty_pairing(const Field& u, const Field& v, const ProblemSpec& ps);

// quadrature L2 norm of the penalty density on Omega
double penalty_norm(const Field& u, const ProblemSpec& ps);

struct PenaltyAxiomsReport {
  bool p1_ok = false, p2_ok = false, p3_ok = false, p4_ok = false;
  double p1_worst_jump_ratio = 0.0; // observed jump / Lipschitz bound
  double p2_min_pairing = 0.0;
  double p4_sup_norm = 0.0;
  bool all_ok() const { return p1_ok && p2_ok && p3_ok && p4_ok; }
  std::string failure; // names the axiom and witness when violated
};

// randomized verification of (P1)-(P4); throws nothing, reports violations
PenaltyAxiomsReport penalty_axioms_check(const ProblemSpec& ps, int trials,
                                         std::uint64_t seed);

struct TmMoment {
  double value = 0.0;       // +inf on overflow
  double max_exponent = 0.0;
  bool overflow = false;
};

// integral of (e^(alpha u^2) - 1)^qexp, exponent capped at 700
TmMoment tm_moment(const Field& u, double alpha, double qexp);

} // namespace owell
