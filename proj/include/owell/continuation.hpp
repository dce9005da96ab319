#pragma once

#include <string>
#include <vector>

#include "owell/solver.hpp"

namespace owell {

struct SweepStep {
  double param_value = 0.0;        // eps (descending) or lambda (ascending)
  double level = 0.0;
  double penalty_violation = 0.0;  // int_Omega [(phi-u)^+]^2
  double constraint_gap = 0.0;     // min over Omega of u - phi
  double outside_mass = 0.0;       // H^1 density outside Omega
  double lamVu2 = 0.0;             // lam int V u^2
  double sup_outside_tilde = 0.0;  // max of u outside OmegaTilde
  double a_threshold = 0.0;        // truncation splice point
  bool refined = false;
  bool warm = false;               // warm-started continuation step
  int outer_iterations = 0;
};

struct SweepReport {
  std::vector<SweepStep> steps;
  Field final_u;
  bool completed = false;
  std::string abort_reason;
};

// per-field metrics shared by both sweeps
SweepStep sweep_metrics(const Field& u, const ProblemSpec& ps);

// solves the penalized problem along a descending eps schedule, each step
// warm-started from the previous solution; the final field is the
// variational-inequality candidate
SweepReport epsilon_sweep(const ProblemSpec& ps, const std::vector<double>& eps_list,
                          const SolverConfig& cfg);

// ascending lambda schedule; every step runs a full epsilon sweep and is
// reported through the final (smallest-eps) solution
SweepReport lambda_sweep(const ProblemSpec& base,
                         const std::vector<double>& lambda_list,
                         const std::vector<double>& eps_list,
                         const SolverConfig& cfg);

struct ViReport {
  double max_violation = 0.0;     // most negative pairing over the samples
  double worst_normalized = 0.0;  // that violation over its pairing scale
  double off_contact_normalized = 0.0; // |pairing| for off-contact directions
  double clip_distance_rel = 0.0;
  int trials = 0;
};

// samples admissible directions around u (clipped into K first) and checks
// the variational inequality pairing stays nonnegative
ViReport vi_verify(const Field& u, const ProblemSpec& ps, int trials,
                   std::uint64_t seed);

// Omega-restricted inequality for the lambda -> infinity limit: u is zero
// outside Omega and tested against the untruncated nonlinearity
ViReport limit_vi_verify(const Field& u, const ProblemSpec& ps, int trials,
                         std::uint64_t seed);

// int_Omega (|grad u|^2 + u^2) of the zero extension of u restricted to Omega
double restricted_h1_energy(const Field& u, const ProblemSpec& ps);

struct TruncationConsistency {
  double sup_outside = 0.0;
  bool ok = false;
  double moser_ratio = 0.0; // sup / L^{2*} (or L^4) norm outside OmegaTilde
};

TruncationConsistency truncation_consistency(const Field& u,
                                             const TruncationParams& tp,
                                             const ProblemSpec& ps);

} // namespace owell
