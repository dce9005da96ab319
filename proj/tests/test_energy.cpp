#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "owell/energy.hpp"
#include "owell/kernels.hpp"
#include "test_problems.hpp"

using namespace owell;
using namespace owell::testing;

TEST_CASE("energy at zero: only the obstacle penalty survives") {
  for (auto ps : {exp2d(), power3d()}) {
    EnergyBreakdown e = energy(Field(ps.grid), ps);
    CHECK(e.quadratic == 0.0);
    CHECK(e.nonlinear == 0.0);
    double expect =
        0.5 / ps.eps *
        kern::active().dot3(ps.w_omega.data(), ps.phi_plus.data(),
                            ps.phi_plus.data(), ps.grid->num_nodes);
    CHECK(e.penalty == doctest::Approx(expect).epsilon(1e-14));
    CHECK(e.total == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("energy at phi+: the penalty vanishes") {
  for (auto ps : {exp2d(), power3d()}) {
    EnergyBreakdown e = energy(ps.phi_plus, ps);
    CHECK(e.penalty == 0.0);
    CHECK(e.quadratic > 0.0);
  }
}

TEST_CASE("energy along t phi+ eventually decreases toward -infinity") {
  for (auto ps : {exp2d(), power3d()}) {
    Field u64 = ps.phi_plus;
    field_scale(64.0, u64);
    double I1 = energy(ps.phi_plus, ps).total;
    double I64 = energy_unchecked(u64, ps).total;
    CHECK(I64 < I1);
    CHECK(I64 < 0.0);
  }
}

TEST_CASE("breakdown satisfies total = quadratic + penalty - nonlinear") {
  Rng rng(2);
  for (auto ps : {exp2d(), power3d()}) {
    for (int k = 0; k < 20; ++k) {
      Field u = random_field(ps, rng, 0.8);
      EnergyBreakdown e = energy(u, ps);
      double recon = e.quadratic + e.penalty - e.nonlinear;
      CHECK(std::fabs(e.total - recon) <=
            1e-14 * (std::fabs(e.total) + std::fabs(recon) + 1e-300));
      CHECK(e.quadratic >= 0.0);
      CHECK(e.penalty >= 0.0);
    }
  }
}

TEST_CASE("exp-critical overflow is rejected with a diagnostic") {
  auto ps = exp2d();
  Field u(ps.grid);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 40.0;
  u.enforce_boundary_zero();
  CHECK_THROWS_WITH_AS(energy(u, ps), doctest::Contains("max |u|"), SolverFailure);
}

TEST_CASE("residual is the exact gradient of the energy (central differences)") {
  Rng rng(7);
  for (auto ps : {exp2d(), power3d()}) {
    for (int k = 0; k < 20; ++k) {
      Field u = random_field(ps, rng, 0.6);
      Field v = random_field(ps, rng, 1.0);
      Field r = residual(u, ps);
      double lhs = weighted_pairing(r, v);

      const double delta = 1e-5;
      Field up = u, um = u;
      field_axpy(delta, v, up);
      field_axpy(-delta, v, um);
      double fd =
          (energy(up, ps).total - energy(um, ps).total) / (2.0 * delta);
      double scale = 1.0 + std::fabs(energy(u, ps).total);
      CHECK(std::fabs(lhs - fd) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("residual at zero inside Omega equals -(1/eps) phi+") {
  for (auto ps : {exp2d(), power3d()}) {
    Field r = residual(Field(ps.grid), ps);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (ps.omega.inside[i])
        CHECK(r[i] == doctest::Approx(-ps.phi_plus[i] / ps.eps).epsilon(1e-14));
      else
        CHECK(r[i] == 0.0);
    }
  }
}

TEST_CASE("residual is continuous across the hinge") {
  auto ps = exp2d();
  // place u exactly on the obstacle at one Omega node and nudge across
  std::size_t node = 0;
  for (std::size_t i = 0; i < ps.grid->num_nodes; ++i)
    if (ps.supp_obstacle.inside[i] && ps.phi[i] > 0.5 * ps.obstacle.height) {
      node = i;
      break;
    }
  Field u(ps.grid);
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = ps.phi_plus[i]; // sits on the obstacle over its support
  double base = residual(u, ps)[node];
  for (double d : {1e-6, 1e-8, 1e-10}) {
    Field up = u;
    up[node] += d;
    Field dn = u;
    dn[node] -= d;
    double jump_up = std::fabs(residual(up, ps)[node] - base);
    double jump_dn = std::fabs(residual(dn, ps)[node] - base);
    double cont_bound = (2.0 / ps.eps + 1e3) * d; // Lipschitz constant scale
    CHECK(jump_up <= cont_bound);
    CHECK(jump_dn <= cont_bound);
  }
}

TEST_CASE("penalty pairing: members of K, constant gap, monotonicity") {
  Rng rng(11);
  for (auto ps : {exp2d(), power3d()}) {
    // u >= phi on Omega -> pairing vanishes for every v
    Field u = random_field(ps, rng, 0.5);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (ps.omega.inside[i] && u[i] < ps.phi[i]) u[i] = ps.phi[i];
    for (int k = 0; k < 5; ++k) {
      Field v = random_field(ps, rng, 1.0);
      CHECK(penalty_pairing(u, v, ps) == 0.0);
    }

    // u = phi - c on Omega, v >= 0: pairing equals -c int_Omega v
    const double c = 0.37;
    Field w(ps.grid);
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = ps.omega.inside[i] ? ps.phi[i] - c : 0.0;
    Field vpos = random_field(ps, rng, 1.0);
    for (std::size_t i = 0; i < vpos.size(); ++i) vpos[i] = std::fabs(vpos[i]);
    vpos.enforce_boundary_zero();
    double omega_int =
        kern::active().dot(ps.w_omega.data(), vpos.data(), vpos.size());
    CHECK(penalty_pairing(w, vpos, ps) ==
          doctest::Approx(-c * omega_int).epsilon(1e-12));

    // (P2) monotonicity on random pairs
    for (int k = 0; k < 100; ++k) {
      Field a = random_field(ps, rng, 1.5);
      Field b = random_field(ps, rng, 1.5);
      Field d = a;
      field_axpy(-1.0, b, d);
      double gap = penalty_pairing(a, d, ps) - penalty_pairing(b, d, ps);
      double scale = std::max(1.0, std::fabs(penalty_pairing(a, d, ps)) +
                                       std::fabs(penalty_pairing(b, d, ps)));
      CHECK(gap >= -1e-12 * scale);
    }
  }
}

TEST_CASE("penalty axioms check passes on the default instances") {
  for (auto ps : {exp2d(), power3d()}) {
    PenaltyAxiomsReport rep = penalty_axioms_check(ps, 100, 424242);
    INFO("failure: ", rep.failure);
    CHECK(rep.all_ok());
    CHECK(rep.p4_sup_norm > 0.0);
    CHECK(std::isfinite(rep.p4_sup_norm));
  }
  CHECK_THROWS_AS(penalty_axioms_check(exp2d(), 0, 1), InvalidInput);
}

TEST_CASE("tm_moment: zero, small-field Taylor, threshold growth, overflow") {
  auto ps = exp2d(65);
  CHECK(tm_moment(Field(ps.grid), 1.0, 1.0).value == 0.0);

  // small fields: moment ~ alpha int u^2 within 10%
  Rng rng(3);
  Field u = random_field(ps, rng, 1.0);
  double alpha = 0.5;
  double m = max_abs(u);
  field_scale(std::sqrt(0.1 / alpha) / m, u); // alpha max(u^2) = 0.1
  TmMoment tm = tm_moment(u, alpha, 1.0);
  double taylor = alpha * integrate_product(u, u);
  CHECK(tm.value == doctest::Approx(taylor).epsilon(0.1));

  // scaled family crossing 4pi/alpha: at least 10x growth per doubling
  Field bump(ps.grid);
  for (std::size_t i = 0; i < bump.size(); ++i) {
    double r2 = ps.grid->radius2(ps.grid->unpack(i));
    bump[i] = std::exp(-r2 / 0.5);
  }
  bump.enforce_boundary_zero();
  double h1 = std::sqrt(grad_pairing(bump, bump) + integrate_product(bump, bump));
  field_scale(1.0 / h1, bump); // ||bump||_{H1} = 1
  double s_threshold = std::sqrt(4.0 * M_PI / 1.0);
  double prev = 0.0;
  for (double s : {s_threshold, 2.0 * s_threshold, 4.0 * s_threshold}) {
    Field us = bump;
    field_scale(s, us);
    TmMoment t = tm_moment(us, 1.0, 1.0);
    if (prev > 0.0 && !t.overflow) CHECK(t.value >= 10.0 * prev);
    prev = t.value;
  }

  // overflow sentinel
  Field big = bump;
  field_scale(60.0 / max_abs(bump), big);
  TmMoment ov = tm_moment(big, 1.0, 2.0);
  CHECK(ov.overflow);
  CHECK(std::isinf(ov.value));
  CHECK(ov.max_exponent > 700.0);

  CHECK_THROWS_AS(tm_moment(Field(power3d().grid), 1.0, 1.0), InvalidInput);
}

TEST_CASE("small-ball lower bound I >= 1/4||u||^2 - C||u||^{l+1} (dim 2)") {
  auto ps = exp2d();
  Rng rng(19);
  const double l = ps.nonlin.p;
  // fit the constant on one half of the samples, check on the other half
  double c_fit = 1e-9;
  std::vector<std::pair<double, double>> holdout; // (norm, I)
  for (int k = 0; k < 100; ++k) {
    Field u = random_field(ps, rng, 1.0);
    double target = std::pow(10.0, rng.uniform(-2.0, 0.0));
    double nrm = ps.norm_lam(u);
    field_scale(target / nrm, u);
    double I = energy_unchecked(u, ps).total;
    if (k % 2 == 0) {
      double deficit = 0.25 * target * target - I;
      if (deficit > 0.0)
        c_fit = std::max(c_fit, deficit / std::pow(target, l + 1.0));
    } else {
      holdout.push_back({target, I});
    }
  }
  for (auto [nrm, I] : holdout)
    CHECK(I >= 0.25 * nrm * nrm - 2.0 * c_fit * std::pow(nrm, l + 1.0) - 1e-12);
}
