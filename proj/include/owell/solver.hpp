#pragma once

#include <cstdint>
#include <vector>

#include "owell/energy.hpp"

namespace owell {

struct SolverConfig {
  int path_points = 33;          // path nodes (endpoints included)
  double grad_tol = 1e-9;        // residual infinity-norm target
  int max_outer = 20000;
  double armijo_c = 1e-4;        // in (0, 1/2)
  double armijo_backtrack = 0.5; // in (0, 1)
  double newton_tol = 1e-8;      // inner linear-solve relative tolerance
  int newton_max = 400;          // inner linear-solve iteration cap
  std::uint64_t rng_seed = 1;

  void validate() const;
};

struct MountainPassResult {
  Field u;
  double level = 0.0;         // candidate mountain-pass level
  double residual_norm = 0.0; // infinity norm
  std::vector<double> path_max_history;
  bool refined = false;
  int outer_iterations = 0;
  bool newton_fallback = false;
};

// w = (1+t*) phi^+ with t* the smallest power of two giving I(w) < 0 and
// I(w) < I(phi^+)
Field find_endpoint_e(const ProblemSpec& ps);

struct GeometryReport {
  double r = 0.0;
  double rho = 0.0; // r^2 / 8
  double min_I_on_sphere = 0.0;
  double C1 = 0.0;   // power case: embedding constants entering the radius
  double C2 = 0.0;
  double C_nu = 0.0; // exp case: fitted small-ball constant
  double I_phi_plus = 0.0;
  bool ok = false;
};

GeometryReport geometry_check(const ProblemSpec& ps, int samples, std::uint64_t seed);

MountainPassResult mountain_pass(const ProblemSpec& ps, const SolverConfig& cfg);

struct NewtonResult {
  Field u;
  bool converged = false;
  int iterations = 0;
  bool descent_fallback = false;
  std::vector<double> residual_history; // infinity norms per iteration
};

// damped Newton on the residual; entry gate: |r(u0)|_inf <= 10 grad_tol
NewtonResult newton_refine(const Field& u0, const ProblemSpec& ps,
                           const SolverConfig& cfg);

// gate-free core used for warm-started continuation steps
NewtonResult newton_solve_from(const Field& u0, const ProblemSpec& ps,
                               const SolverConfig& cfg, int max_newton);

// minimum of the discrete Rayleigh quotient |grad u|_2^2 / |u|_{2*}^2 on the
// grid (dimension 3), by normalized gradient descent in the H^1_0 metric
double sobolev_estimate(const std::shared_ptr<const GridSpec>& grid);

// sup |u|_s / ||u||_lam over the discrete space, by fixed-point ascent
double embedding_constant(const ProblemSpec& ps, double s, std::uint64_t seed);

// measured L2 embedding constant C_e = sup |u|_2 / ||u||_lam
double l2_embedding_constant(const ProblemSpec& ps);

} // namespace owell
