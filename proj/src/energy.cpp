#include "owell/energy.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "owell/kernels.hpp"

namespace owell {

namespace {

thread_local std::vector<double> scratch_a, scratch_b;

std::vector<double>& scratch(std::vector<double>& s, std::size_t n) {
  if (s.size() != n) s.assign(n, 0.0);
  return s;
}

} // namespace

ProblemSpec ProblemSpec::build(std::shared_ptr<const GridSpec> grid, PotentialSpec pot,
                               ObstacleSpec obs, NonlinearitySpec nl, double lam,
                               double eps) {
  if (!(eps > 0.0)) throw InvalidInput("problem: eps must be > 0");
  if (lam < 0.0) throw InvalidInput("problem: lambda must be >= 0");
  pot.validate(grid->half_extent);
  obs.validate(pot);
  if (nl.dim != grid->dim)
    throw InvalidInput("problem: nonlinearity dimension does not match the grid");

  ProblemSpec ps;
  ps.grid = grid;
  ps.potential = pot;
  ps.obstacle = obs;
  ps.nonlin = nl;
  ps.trunc = truncation_build(nl);
  ps.lam = lam;
  ps.eps = eps;

  const GridSpec& g = *grid;
  const double origin[3] = {0.0, 0.0, 0.0};
  ps.omega = make_ball_mask(g, Region::Omega, origin, pot.well_radius, false);
  ps.omega_tilde =
      make_ball_mask(g, Region::OmegaTilde, origin, pot.tilde_radius, false);
  ps.supp_obstacle = make_ball_mask(g, Region::SuppObstacle, obs.center.data(),
                                    obs.radius, true);

  // mask nesting, and OmegaTilde strictly inside the box
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    if (ps.supp_obstacle.inside[i] && !ps.omega.inside[i])
      throw InvalidInput("problem: obstacle support escapes Omega");
    if (ps.omega.inside[i] && !ps.omega_tilde.inside[i])
      throw InvalidInput("problem: Omega escapes OmegaTilde");
    if (ps.omega_tilde.inside[i] && g.on_boundary(g.unpack(i)))
      throw InvalidInput("problem: OmegaTilde touches the box boundary");
  }
  if (ps.supp_obstacle.count == 0)
    throw InvalidInput("problem: obstacle support contains no node");

  ps.V.resize(g.num_nodes);
  ps.phi.resize(g.num_nodes);
  ps.phi_plus = Field(grid);
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    auto c = g.unpack(i);
    ps.V[i] = pot.value(std::sqrt(g.radius2(c)));
    ps.phi[i] = obs.value(g.dist2(c, obs.center.data()));
    ps.phi_plus[i] = ps.phi[i] > 0.0 ? ps.phi[i] : 0.0;
  }
  ps.phi_plus.enforce_boundary_zero(); // support sits inside Omega already

  ps.one_lam_V.resize(g.num_nodes);
  ps.w_one_lam_V.resize(g.num_nodes);
  ps.w_omega.resize(g.num_nodes);
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    ps.one_lam_V[i] = 1.0 + lam * ps.V[i];
    ps.w_one_lam_V[i] = g.weight[i] * ps.one_lam_V[i];
    ps.w_omega[i] = ps.omega.inside[i] ? g.weight[i] : 0.0;
  }
  ps.phi_l2_omega = std::sqrt(
      kern::active().dot3(ps.w_omega.data(), ps.phi.data(), ps.phi.data(),
                          g.num_nodes));
  return ps;
}

ProblemSpec ProblemSpec::with_eps(double new_eps) const {
  if (!(new_eps > 0.0)) throw InvalidInput("problem: eps must be > 0");
  ProblemSpec ps = *this;
  ps.eps = new_eps;
  return ps;
}

ProblemSpec ProblemSpec::with_lambda(double new_lam) const {
  if (new_lam < 0.0) throw InvalidInput("problem: lambda must be >= 0");
  ProblemSpec ps = *this;
  ps.lam = new_lam;
  for (std::size_t i = 0; i < ps.one_lam_V.size(); ++i) {
    ps.one_lam_V[i] = 1.0 + new_lam * ps.V[i];
    ps.w_one_lam_V[i] = grid->weight[i] * ps.one_lam_V[i];
  }
  return ps;
}

double ProblemSpec::norm_lam_sq(const Field& u) const {
  return grad_pairing(u, u) +
         kern::active().dot3(w_one_lam_V.data(), u.data(), u.data(), u.size());
}

double ProblemSpec::norm_lam(const Field& u) const {
  return std::sqrt(norm_lam_sq(u));
}

EnergyBreakdown energy_unchecked(const Field& u, const ProblemSpec& ps) {
  const GridSpec& g = *ps.grid;
  const auto& k = kern::active();
  EnergyBreakdown e;
  e.quadratic = 0.5 * ps.norm_lam_sq(u);

  auto& hinge = scratch(scratch_a, g.num_nodes);
  k.sub_relu(ps.phi.data(), u.data(), hinge.data(), g.num_nodes);
  e.penalty = 0.5 / ps.eps *
              k.dot3(ps.w_omega.data(), hinge.data(), hinge.data(), g.num_nodes);

  auto& gw = scratch(scratch_b, g.num_nodes);
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    double t = u[i];
    gw[i] = t > 0.0
                ? g.weight[i] * G_eval(ps.nonlin, ps.trunc,
                                       ps.omega_tilde.inside[i] != 0, t)
                : 0.0;
  }
  e.nonlinear = k.sum(gw.data(), g.num_nodes);
  e.total = e.quadratic + e.penalty - e.nonlinear;
  return e;
}

EnergyBreakdown energy(const Field& u, const ProblemSpec& ps) {
  EnergyBreakdown e = energy_unchecked(u, ps);
  if (!std::isfinite(e.total)) {
    std::ostringstream os;
    os << "energy: non-finite nonlinear term (max |u| = " << max_abs(u) << ")";
    throw SolverFailure(os.str());
  }
  return e;
}

Field residual(const Field& u, const ProblemSpec& ps) {
  const GridSpec& g = *ps.grid;
  Field r = laplacian_apply(u);
  const double inv_eps = 1.0 / ps.eps;
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    double t = u[i];
    double v = r[i] + ps.one_lam_V[i] * t;
    if (ps.omega.inside[i]) {
      double hinge = ps.phi[i] - t;
      if (hinge > 0.0) v -= inv_eps * hinge;
    }
    if (t > 0.0)
      v -= g_eval(ps.nonlin, ps.trunc, ps.omega_tilde.inside[i] != 0, t);
    r[i] = v;
  }
  return r;
}

double weighted_pairing(const Field& r, const Field& v) {
  return kern::active().dot3(r.grid().weight.data(), r.data(), v.data(), r.size());
}

double penalty_pairing(const Field& u, const Field& v, const ProblemSpec& ps) {
  const GridSpec& g = *ps.grid;
  auto& hinge = scratch(scratch_a, g.num_nodes);
  kern::active().sub_relu(ps.phi.data(), u.data(), hinge.data(), g.num_nodes);
  return -kern::active().dot3(ps.w_omega.data(), hinge.data(), v.data(),
                              g.num_nodes);
}

double penalty_norm(const Field& u, const ProblemSpec& ps) {
  const GridSpec& g = *ps.grid;
  auto& hinge = scratch(scratch_a, g.num_nodes);
  kern::active().sub_relu(ps.phi.data(), u.data(), hinge.data(), g.num_nodes);
  return std::sqrt(kern::active().dot3(ps.w_omega.data(), hinge.data(),
                                       hinge.data(), g.num_nodes));
}

namespace {

Field random_field(const ProblemSpec& ps, Rng& rng, double amplitude) {
  Field u(ps.grid);
  const GridSpec& g = *ps.grid;
  for (std::size_t i = 0; i < g.num_nodes; ++i)
    u[i] = amplitude * (2.0 * rng.uniform() - 1.0);
  u.enforce_boundary_zero();
  return u;
}

} // namespace

PenaltyAxiomsReport penalty_axioms_check(const ProblemSpec& ps, int trials,
                                         std::uint64_t seed) {
  if (trials < 1) throw InvalidInput("penalty_axioms_check: trials must be >= 1");
  PenaltyAxiomsReport rep;
  Rng rng(seed);
  const GridSpec& g = *ps.grid;
  const auto& k = kern::active();

  // (P1) continuity of t -> <P(u+tv), w> on sampled segments; the hinge is
  // 1-Lipschitz so |jump| <= int_Omega |v||w| dt
  rep.p1_ok = true;
  for (int trial = 0; trial < std::min(trials, 16) && rep.p1_ok; ++trial) {
    Field u = random_field(ps, rng, 1.0);
    Field v = random_field(ps, rng, 1.0);
    Field w = random_field(ps, rng, 1.0);
    std::vector<double> av(g.num_nodes), aw(g.num_nodes);
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
      av[i] = std::fabs(v[i]);
      aw[i] = std::fabs(w[i]);
    }
    double lip = k.dot3(ps.w_omega.data(), av.data(), aw.data(), g.num_nodes);
    const int segments = 64;
    const double dt = 1.0 / segments;
    Field ut = u;
    double prev = penalty_pairing(ut, w, ps);
    for (int s = 1; s <= segments; ++s) {
      ut = u;
      field_axpy(dt * s, v, ut);
      double cur = penalty_pairing(ut, w, ps);
      double jump = std::fabs(cur - prev);
      double bound = lip * dt * (1.0 + 1e-9) + 1e-14 * (1.0 + std::fabs(prev));
      rep.p1_worst_jump_ratio =
          std::max(rep.p1_worst_jump_ratio, bound > 0 ? jump / bound : 0.0);
      if (jump > bound) {
        rep.p1_ok = false;
        rep.failure = "(P1) continuity violated on a sampled segment";
        break;
      }
      prev = cur;
    }
  }

  // (P2) monotonicity
  rep.p2_ok = true;
  rep.p2_min_pairing = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    Field u = random_field(ps, rng, 1.0 + rng.uniform());
    Field v = random_field(ps, rng, 1.0 + rng.uniform());
    Field d = u;
    field_axpy(-1.0, v, d); // d = u - v
    double pu = penalty_pairing(u, d, ps);
    double pv = penalty_pairing(v, d, ps);
    double gap = pu - pv;
    double scale = std::max(1.0, std::fabs(pu) + std::fabs(pv));
    rep.p2_min_pairing = std::min(rep.p2_min_pairing, gap);
    if (gap < -1e-12 * scale) {
      rep.p2_ok = false;
      rep.failure = "(P2) monotonicity violated on a random pair";
    }
  }

  // (P3) both implications on constructed witnesses
  rep.p3_ok = true;
  {
    Field u = random_field(ps, rng, 1.0);
    for (std::size_t i = 0; i < g.num_nodes; ++i)
      if (ps.omega.inside[i] && u[i] < ps.phi[i]) u[i] = ps.phi[i];
    u.enforce_boundary_zero(); // Omega is interior, boundary untouched anyway
    if (penalty_norm(u, ps) != 0.0) {
      rep.p3_ok = false;
      rep.failure = "(P3) P(u) != 0 for a member of K";
    }
    // converse witness: dip one Omega node below the obstacle
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
      if (ps.omega.inside[i]) {
        Field bad = u;
        bad[i] = ps.phi[i] - 1.0;
        if (!(penalty_norm(bad, ps) > 0.0)) {
          rep.p3_ok = false;
          rep.failure = "(P3) P(u) = 0 for a non-member of K";
        }
        break;
      }
    }
    // reverse direction on random fields: P(u) = 0 implies u in K
    for (int trial = 0; trial < trials && rep.p3_ok; ++trial) {
      Field w = random_field(ps, rng, 0.2);
      if (penalty_norm(w, ps) == 0.0) {
        for (std::size_t i = 0; i < g.num_nodes; ++i)
          if (ps.omega.inside[i] && w[i] < ps.phi[i]) {
            rep.p3_ok = false;
            rep.failure = "(P3) P(u) = 0 but u below the obstacle";
            break;
          }
      }
    }
  }

  // (P4) boundedness of P over a norm ball
  rep.p4_ok = true;
  for (int trial = 0; trial < trials; ++trial) {
    Field u = random_field(ps, rng, 1.0);
    double nrm = ps.norm_lam(u);
    if (nrm > 0) field_scale(10.0 * rng.uniform() / nrm, u);
    double pn = penalty_norm(u, ps);
    if (!std::isfinite(pn)) {
      rep.p4_ok = false;
      rep.failure = "(P4) unbounded penalty on a norm ball";
    }
    rep.p4_sup_norm = std::max(rep.p4_sup_norm, pn);
  }
  return rep;
}

TmMoment tm_moment(const Field& u, double alpha, double qexp) {
  if (u.grid().dim != 2) throw InvalidInput("tm_moment: requires dimension 2");
  if (!(alpha > 0.0)) throw InvalidInput("tm_moment: alpha must be > 0");
  if (!(qexp >= 1.0)) throw InvalidInput("tm_moment: qexp must be >= 1");
  const GridSpec& g = u.grid();
  TmMoment m;
  auto& term = scratch(scratch_a, g.num_nodes);
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    double e1 = alpha * u[i] * u[i];
    m.max_exponent = std::max(m.max_exponent, qexp * e1);
    if (e1 > 700.0) {
      m.overflow = true;
      term[i] = 0.0;
      continue;
    }
    double b = std::expm1(e1);
    if (b <= 0.0) {
      term[i] = 0.0;
      continue;
    }
    double le = qexp * std::log(b);
    if (le > 700.0) {
      m.overflow = true;
      term[i] = 0.0;
      continue;
    }
    term[i] = g.weight[i] * std::exp(le);
  }
  m.value = m.overflow ? std::numeric_limits<double>::infinity()
                       : kern::active().sum(term.data(), g.num_nodes);
  return m;
}

} // namespace owell
