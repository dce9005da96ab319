#pragma once

// Shared fixtures: small problem instances mirroring the default configs.

#include "owell/energy.hpp"

namespace owell::testing {

inline ProblemSpec exp2d(int n = 33, double lam = 16.0, double eps = 1e-2,
                         double nu = 1.0, double height = 0.12) {
  auto grid = GridSpec::make(2, n, 3.0);
  PotentialSpec pot{1.0, 1.0, 1.6};
  ObstacleSpec obs{{0.0, 0.0, 0.0}, 0.5, height, 0.05};
  auto nl = NonlinearitySpec::exp_critical(2, nu, 3.0, 1.0, 4.0);
  return ProblemSpec::build(grid, pot, obs, nl, lam, eps);
}

inline ProblemSpec power3d(int n = 17, double lam = 16.0, double eps = 1e-2,
                           double mu = 1.0, double height = 0.12) {
  auto grid = GridSpec::make(3, n, 3.0);
  PotentialSpec pot{1.0, 1.0, 1.6};
  ObstacleSpec obs{{0.0, 0.0, 0.0}, 0.5, height, 0.05};
  auto nl = NonlinearitySpec::power_critical(3, mu, 4.0);
  return ProblemSpec::build(grid, pot, obs, nl, lam, eps);
}

inline Field random_field(const ProblemSpec& ps, Rng& rng, double amp = 1.0) {
  Field u(ps.grid);
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = amp * (2.0 * rng.uniform() - 1.0);
  u.enforce_boundary_zero();
  return u;
}

} // namespace owell::testing
