#pragma once

#include <array>
#include <string>
#include <vector>

#include "owell/continuation.hpp"

namespace owell {

// Flat sectioned key-value config; grammar documented in the README.
// Unknown sections or keys are rejected with their line and column.
struct RunConfig {
  // [grid]
  int dimension = 2;
  int nodes_per_axis = 65;
  double half_extent = 3.0;

  // [potential]
  double well_radius = 1.0;
  double scale = 1.0;
  double tilde_radius = 1.6;

  // [obstacle]
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double radius = 0.5;
  double height = 0.12;
  double outside_depth = 0.05;

  // [nonlinearity]
  std::string variant = "exp_critical"; // or power_critical
  double mu = 1.0;
  double q = 4.0;
  double nu = 1.0;
  double p = 3.0;
  double alpha0 = 1.0;
  double theta = 4.0;

  // [problem]
  double lambda = 16.0;
  double epsilon = 1e-2;

  // [solver]
  SolverConfig solver;

  // [sweep]
  double eps0 = 0.1;
  int eps_steps = 9;
  double lambda_base = 4.0;
  int lambda_steps = 8;

  // [output]
  std::string dir = "out";
  bool dump_fields = false;
  std::vector<std::string> formats{"json", "csv"};

  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_string(const std::string& text, const std::string& name);

  NonlinearitySpec build_nonlinearity() const;
  ProblemSpec build_problem() const;
  std::vector<double> eps_schedule() const;    // eps0 * 2^-k
  std::vector<double> lambda_schedule() const; // lambda_base^k

  // normalized one-line-per-key rendering used for the manifest hash
  std::string canonical_text() const;
};

// worker cap from OBSTACLE_WELL_THREADS (>= 1); hardware count when unset
int env_thread_cap();

} // namespace owell
