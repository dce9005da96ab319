#include "owell/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "owell/kernels.hpp"

namespace owell {

namespace {

bool accepted_critical_point(const Field& u, double level, double residual_inf,
                             const SolverConfig& cfg, std::string& why) {
  if (!(residual_inf <= cfg.grad_tol)) {
    why = "residual above grad_tol";
    return false;
  }
  if (!(level > 0.0)) {
    why = "nonpositive level";
    return false;
  }
  if (!(min_value(u) >= -1e-8 * std::max(max_value(u), 1e-300))) {
    why = "negative part too large";
    return false;
  }
  return true;
}

} // namespace

SweepStep sweep_metrics(const Field& u, const ProblemSpec& ps) {
  const GridSpec& g = *ps.grid;
  SweepStep s;
  s.level = energy_unchecked(u, ps).total;
  double pn = penalty_norm(u, ps);
  s.penalty_violation = pn * pn;

  s.constraint_gap = std::numeric_limits<double>::infinity();
  s.sup_outside_tilde = 0.0;
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    if (ps.omega.inside[i])
      s.constraint_gap = std::min(s.constraint_gap, u[i] - ps.phi[i]);
    else if (!ps.omega_tilde.inside[i])
      s.sup_outside_tilde = std::max(s.sup_outside_tilde, u[i]);
  }
  s.outside_mass = h1_mass_where(u, ps.omega.inside, 0);
  s.lamVu2 = ps.lam * integrate_product3(g, ps.V.data(), u.data(), u.data());
  s.a_threshold = ps.trunc.a;
  return s;
}

SweepReport epsilon_sweep(const ProblemSpec& ps, const std::vector<double>& eps_list,
                          const SolverConfig& cfg) {
  if (eps_list.size() < 3)
    throw InvalidInput("epsilon_sweep: need at least 3 eps values");
  for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
    if (!(eps_list[i] > eps_list[i + 1]) || !(eps_list[i + 1] > 0.0))
      throw InvalidInput("epsilon_sweep: eps schedule must be positive descending");

  SweepReport rep;
  Field u;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    ProblemSpec psk = ps.with_eps(eps_list[k]);
    SweepStep step;
    step.param_value = eps_list[k];

    bool warm_ok = false;
    if (k > 0) {
      NewtonResult nr = newton_solve_from(u, psk, cfg, 120);
      if (nr.converged) {
        u = std::move(nr.u);
        step.warm = true;
        step.outer_iterations = nr.iterations;
        warm_ok = true;
      }
    }
    if (!warm_ok) {
      MountainPassResult mp = mountain_pass(psk, cfg);
      u = std::move(mp.u);
      step.warm = false;
      step.outer_iterations = mp.outer_iterations;
      if (!mp.refined) {
        step.refined = false;
        SweepStep metrics = sweep_metrics(u, psk);
        metrics.param_value = step.param_value;
        metrics.warm = step.warm;
        metrics.outer_iterations = step.outer_iterations;
        rep.steps.push_back(metrics);
        rep.completed = false;
        rep.abort_reason = "unrefined solve at eps=" + std::to_string(eps_list[k]);
        rep.final_u = u;
        return rep;
      }
    }

    Field r = residual(u, psk);
    double rn = max_abs(r);
    double level = energy_unchecked(u, psk).total;
    std::string why;
    step.refined = accepted_critical_point(u, level, rn, cfg, why);

    SweepStep metrics = sweep_metrics(u, psk);
    metrics.param_value = step.param_value;
    metrics.warm = step.warm;
    metrics.outer_iterations = step.outer_iterations;
    metrics.refined = step.refined;
    rep.steps.push_back(metrics);

    if (!step.refined) {
      rep.completed = false;
      rep.abort_reason =
          "solve rejected at eps=" + std::to_string(eps_list[k]) + ": " + why;
      rep.final_u = u;
      return rep;
    }
  }
  rep.completed = true;
  rep.final_u = u;
  return rep;
}

SweepReport lambda_sweep(const ProblemSpec& base,
                         const std::vector<double>& lambda_list,
                         const std::vector<double>& eps_list,
                         const SolverConfig& cfg) {
  if (lambda_list.empty())
    throw InvalidInput("lambda_sweep: empty lambda schedule");
  for (std::size_t i = 0; i + 1 < lambda_list.size(); ++i)
    if (!(lambda_list[i] < lambda_list[i + 1]))
      throw InvalidInput("lambda_sweep: lambda schedule must be ascending");

  SweepReport rep;
  for (double lam : lambda_list) {
    ProblemSpec psl = base.with_lambda(lam);
    SweepReport sub = epsilon_sweep(psl, eps_list, cfg);
    if (!sub.completed) {
      rep.completed = false;
      rep.abort_reason = "lambda=" + std::to_string(lam) + ": " + sub.abort_reason;
      rep.final_u = sub.final_u;
      return rep;
    }
    ProblemSpec ps_final = psl.with_eps(eps_list.back());
    SweepStep s = sweep_metrics(sub.final_u, ps_final);
    s.param_value = lam;
    s.refined = true;
    s.warm = sub.steps.back().warm;
    s.outer_iterations = 0;
    for (const SweepStep& st : sub.steps) s.outer_iterations += st.outer_iterations;
    rep.steps.push_back(s);
    rep.final_u = sub.final_u;
  }
  rep.completed = true;
  return rep;
}

namespace {

// nonnegative smooth bump vanishing on the box boundary
Field positive_bump(const ProblemSpec& ps, Rng& rng, bool inside_omega_only) {
  const GridSpec& g = *ps.grid;
  Field psi(ps.grid);
  double c[3] = {0, 0, 0};
  double reach = inside_omega_only ? 0.6 * ps.potential.well_radius
                                   : 0.7 * g.half_extent;
  for (int d = 0; d < g.dim; ++d) c[d] = rng.uniform(-reach, reach);
  double sig = rng.uniform(std::max(2.0 * g.spacing, 0.05 * g.half_extent),
                           0.3 * g.half_extent);
  double amp = rng.uniform(0.1, 1.0);
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    double d2 = g.dist2(g.unpack(i), c);
    psi[i] = amp * std::exp(-d2 / (sig * sig));
  }
  if (inside_omega_only)
    for (std::size_t i = 0; i < g.num_nodes; ++i)
      if (!ps.omega.inside[i]) psi[i] = 0.0;
  psi.enforce_boundary_zero();
  return psi;
}

// VI pairing kernel: r_vi = A u - g(x, u) (no penalty term), so the tested
// pairing is <r_vi, v-u>_w
Field vi_residual(const Field& u, const ProblemSpec& ps, bool limit_form) {
  const GridSpec& g = *ps.grid;
  Field r = laplacian_apply(u);
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    double t = u[i];
    double v = r[i] + (limit_form ? t : ps.one_lam_V[i] * t);
    if (t > 0.0) {
      if (limit_form)
        v -= ps.nonlin.f(t);
      else
        v -= g_eval(ps.nonlin, ps.trunc, ps.omega_tilde.inside[i] != 0, t);
    }
    r[i] = v;
  }
  return r;
}

ViReport vi_verify_impl(Field u, const ProblemSpec& ps, int trials,
                        std::uint64_t seed, bool limit_form) {
  if (trials < 10) throw InvalidInput("vi_verify: trials must be >= 10");
  const GridSpec& g = *ps.grid;
  Rng rng(seed);

  if (limit_form) // zero extension of the Omega restriction
    for (std::size_t i = 0; i < g.num_nodes; ++i)
      if (!ps.omega.inside[i]) u[i] = 0.0;

  // clip into K
  Field clipped = u;
  for (std::size_t i = 0; i < g.num_nodes; ++i)
    if (ps.omega.inside[i] && clipped[i] < ps.phi[i]) clipped[i] = ps.phi[i];
  Field dclip = clipped;
  field_axpy(-1.0, u, dclip);
  double un = ps.norm_lam(u);
  double clip_rel = un > 0.0 ? ps.norm_lam(dclip) / un : 0.0;
  if (clip_rel > 1e-3)
    throw InvalidInput("vi_verify: input too far from feasibility (clip distance " +
                       std::to_string(clip_rel) + " of |u|)");
  u = std::move(clipped);

  Field rvi = vi_residual(u, ps, limit_form);

  ViReport rep;
  rep.trials = trials;
  rep.clip_distance_rel = clip_rel;
  rep.max_violation = std::numeric_limits<double>::infinity();
  rep.worst_normalized = std::numeric_limits<double>::infinity();

  const double contact_tol = 1e-10 * std::max(max_value(ps.phi_plus), 1e-300);
  std::vector<std::uint8_t> contact(g.num_nodes, 0);
  for (std::size_t i = 0; i < g.num_nodes; ++i)
    if (ps.omega.inside[i] && u[i] - ps.phi[i] <= contact_tol) contact[i] = 1;

  auto test_direction = [&](const Field& d) {
    double pairing = weighted_pairing(rvi, d);
    double bpart = grad_pairing(u, d);
    if (limit_form)
      bpart += integrate_product(u, d);
    else
      bpart += kern::active().dot3(ps.w_one_lam_V.data(), u.data(), d.data(),
                                   g.num_nodes);
    double gpart = bpart - pairing;
    double scale = std::max({1.0, std::fabs(bpart), std::fabs(gpart)});
    if (pairing < rep.max_violation) {
      rep.max_violation = pairing;
      rep.worst_normalized = pairing / scale;
    }
    return pairing / scale;
  };

  for (int trial = 0; trial < trials; ++trial) {
    Field psi = positive_bump(ps, rng, limit_form);
    double t = (trial % 2 == 0) ? 0.1 : 1.0;

    // family (i): v = u + t psi stays in K since psi >= 0
    Field d1 = psi;
    field_scale(t, d1);
    test_direction(d1);

    // family (ii): v = max(u - t psi, phi on Omega)
    Field d2(ps.grid);
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
      double vi = u[i] - t * psi[i];
      if (ps.omega.inside[i] && vi < ps.phi[i]) vi = ps.phi[i];
      if (limit_form && !ps.omega.inside[i]) vi = 0.0;
      d2[i] = vi - u[i];
    }
    test_direction(d2);
  }

  // complementarity probe: directions clear of the contact set pair against
  // the plain residual and should vanish
  rep.off_contact_normalized = 0.0;
  for (int trial = 0; trial < std::max(trials / 4, 5); ++trial) {
    Field psi = positive_bump(ps, rng, limit_form);
    bool touches = false;
    for (std::size_t i = 0; i < g.num_nodes && !touches; ++i)
      if (contact[i] && psi[i] > 1e-14) touches = true;
    if (touches) {
      for (std::size_t i = 0; i < g.num_nodes; ++i)
        if (contact[i]) psi[i] = 0.0;
    }
    double nv = std::fabs(test_direction(psi));
    rep.off_contact_normalized = std::max(rep.off_contact_normalized, nv);
  }
  return rep;
}

} // namespace

ViReport vi_verify(const Field& u, const ProblemSpec& ps, int trials,
                   std::uint64_t seed) {
  return vi_verify_impl(u, ps, trials, seed, false);
}

ViReport limit_vi_verify(const Field& u, const ProblemSpec& ps, int trials,
                         std::uint64_t seed) {
  return vi_verify_impl(u, ps, trials, seed, true);
}

double restricted_h1_energy(const Field& u, const ProblemSpec& ps) {
  Field ur = u;
  for (std::size_t i = 0; i < ur.size(); ++i)
    if (!ps.omega.inside[i]) ur[i] = 0.0;
  return grad_pairing(ur, ur) + integrate_product(ur, ur);
}

TruncationConsistency truncation_consistency(const Field& u,
                                             const TruncationParams& tp,
                                             const ProblemSpec& ps) {
  const GridSpec& g = *ps.grid;
  TruncationConsistency tc;
  double norm_pow = ps.nonlin.dim == 3 ? 6.0 : 4.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    if (ps.omega_tilde.inside[i]) continue;
    tc.sup_outside = std::max(tc.sup_outside, u[i]);
    acc += g.weight[i] * std::pow(std::fabs(u[i]), norm_pow);
  }
  tc.ok = tc.sup_outside <= tp.a;
  double denom = std::pow(acc, 1.0 / norm_pow);
  tc.moser_ratio = denom > 0.0 ? tc.sup_outside / denom : 0.0;
  return tc;
}

} // namespace owell
