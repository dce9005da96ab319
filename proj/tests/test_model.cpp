#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "owell/common.hpp"
#include "owell/model.hpp"

using namespace owell;

namespace {

// independent oracle for the splice point: plain bisection on the stated
// scalar equation, no shared code with truncation_build
double bisect_oracle(double (*fn)(double), double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (fn(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double power_root_eq(double a) { // a^3 + a^5 = a/4 for N=3, q=4, mu=1
  return a * a * a + a * a * a * a * a - a / 4.0;
}

} // namespace

TEST_CASE("truncation root matches the bisection oracle (N=3, q=4, mu=1)") {
  double oracle = bisect_oracle(power_root_eq, 1e-6, 1.0);
  CHECK(oracle == doctest::Approx(0.455090).epsilon(1e-5));

  auto nl = NonlinearitySpec::power_critical(3, 1.0, 4.0);
  TruncationParams tp = truncation_build(nl);
  CHECK(tp.k == 4.0);
  CHECK(std::fabs(tp.a - oracle) <= 1e-6);
  double target = tp.a / tp.k;
  CHECK(std::fabs(nl.f(tp.a) - target) <= 1e-12 * target);
}

TEST_CASE("k follows the superquadratic exponent") {
  auto nl3 = NonlinearitySpec::power_critical(3, 1.0, 3.0);
  CHECK(truncation_build(nl3).k == 6.0); // 2q/(q-2) at q=3

  auto nle = NonlinearitySpec::exp_critical(2, 1.0, 3.0, 1.0, 4.0);
  CHECK(truncation_build(nle).k == 4.0); // 2theta/(theta-2) at theta=4
}

TEST_CASE("exp-critical root satisfies f(a) = a/k") {
  for (double nu : {0.5, 1.0, 4.0}) {
    auto nl = NonlinearitySpec::exp_critical(2, nu, 3.0, 1.0, 4.0);
    TruncationParams tp = truncation_build(nl);
    double target = tp.a / tp.k;
    CHECK(std::fabs(nl.f(tp.a) - target) <= 1e-12 * target);
  }
}

TEST_CASE("nonlinearity validation") {
  CHECK_THROWS_AS(NonlinearitySpec::power_critical(2, 1.0, 4.0), InvalidInput);
  CHECK_THROWS_AS(NonlinearitySpec::power_critical(3, -1.0, 4.0), InvalidInput);
  CHECK_THROWS_AS(NonlinearitySpec::power_critical(3, 1.0, 7.0), InvalidInput);
  CHECK_THROWS_AS(NonlinearitySpec::exp_critical(3, 1.0, 3.0, 1.0, 4.0),
                  InvalidInput);
  CHECK_THROWS_AS(NonlinearitySpec::exp_critical(2, 1.0, 3.0, 1.0, 4.5),
                  InvalidInput); // theta > p+1
  CHECK_THROWS_AS(NonlinearitySpec::exp_critical(2, 1.0, 0.5, 1.0, 2.5),
                  InvalidInput);
}

TEST_CASE("g: zero branch, linear tail, direct value") {
  auto nl = NonlinearitySpec::power_critical(3, 1.0, 4.0);
  TruncationParams tp = truncation_build(nl);

  for (bool in_tilde : {true, false}) {
    CHECK(g_eval(nl, tp, in_tilde, 0.0) == 0.0);
    CHECK(g_eval(nl, tp, in_tilde, -0.5) == 0.0);
    CHECK(g_eval(nl, tp, in_tilde, -100.0) == 0.0);
  }
  CHECK(g_eval(nl, tp, false, 2.0 * tp.a) ==
        doctest::Approx(2.0 * tp.a / tp.k).epsilon(1e-15));
  // f(0.2) = 0.2^3 + 0.2^5
  CHECK(g_eval(nl, tp, true, 0.2) == doctest::Approx(0.00832).epsilon(1e-14));
}

TEST_CASE("G: zero at zero, linear-tail primitive, finite-difference oracle") {
  for (int variant : {0, 1}) {
    NonlinearitySpec nl = variant == 0
                              ? NonlinearitySpec::power_critical(3, 1.0, 4.0)
                              : NonlinearitySpec::exp_critical(2, 1.0, 3.0, 1.0, 4.0);
    TruncationParams tp = truncation_build(nl);

    CHECK(G_eval(nl, tp, true, 0.0) == 0.0);
    CHECK(G_eval(nl, tp, false, 0.0) == 0.0);

    for (double t : {tp.a, 1.5 * tp.a, 4.0 * tp.a}) {
      double expect = nl.F(tp.a) + (t * t - tp.a * tp.a) / (2.0 * tp.k);
      CHECK(G_eval(nl, tp, false, t) == doctest::Approx(expect).epsilon(1e-13));
    }

    // centered difference of G matches g within 1e-8 relative
    Rng rng(variant + 1);
    for (int k = 0; k < 100; ++k) {
      bool in_tilde = rng.uniform() < 0.5;
      double t = std::pow(10.0, rng.uniform(-2.0, 0.5));
      double dt = 1e-6 * std::max(t, 1.0);
      double fd = (G_eval(nl, tp, in_tilde, t + dt) -
                   G_eval(nl, tp, in_tilde, t - dt)) /
                  (2.0 * dt);
      double gv = g_eval(nl, tp, in_tilde, t);
      CHECK(std::fabs(fd - gv) <= 1e-8 * (std::fabs(gv) + 1e-12));
    }
  }
}

TEST_CASE("splice continuity: |f(a) - a/k| <= 1e-12 a/k") {
  for (int variant : {0, 1}) {
    NonlinearitySpec nl = variant == 0
                              ? NonlinearitySpec::power_critical(3, 2.0, 3.5)
                              : NonlinearitySpec::exp_critical(2, 2.0, 2.5, 0.7, 3.5);
    TruncationParams tp = truncation_build(nl);
    CHECK(std::fabs(nl.f(tp.a) - tp.a / tp.k) <= 1e-12 * (tp.a / tp.k));
  }
}

namespace {

struct GSample {
  NonlinearitySpec nl;
  TruncationParams tp;
};

GSample power_sample() {
  auto nl = NonlinearitySpec::power_critical(3, 1.0, 4.0);
  return {nl, truncation_build(nl)};
}

GSample exp_sample() {
  auto nl = NonlinearitySpec::exp_critical(2, 1.0, 3.0, 1.0, 4.0);
  return {nl, truncation_build(nl)};
}

} // namespace

TEST_CASE("(g2): g(x,t)/t vanishes uniformly as t -> 0+") {
  for (auto s : {power_sample(), exp_sample()}) {
    double t0 = s.nl.small_slope_threshold(1e-3);
    CHECK(t0 > 0.0);
    for (int i = 1; i <= 50; ++i) {
      double t = t0 * double(i) / 50.0;
      for (bool in_tilde : {true, false})
        CHECK(g_eval(s.nl, s.tp, in_tilde, t) / t <= 1e-3 * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("(g3): |g| <= mu beta |t|^{q-1} + C_beta |t|^{2*-1} with beta = 1") {
  auto s = power_sample();
  const double ts = s.nl.two_star();
  // C_beta = 1 works since the truncation only lowers f: h <= f pointwise
  const double c_beta = 1.0;
  Rng rng(5);
  for (int k = 0; k < 2000; ++k) {
    double t = std::pow(10.0, rng.uniform(-6.0, 2.0));
    for (bool in_tilde : {true, false}) {
      double bound =
          s.nl.mu * std::pow(t, s.nl.q - 1.0) + c_beta * std::pow(t, ts - 1.0);
      CHECK(std::fabs(g_eval(s.nl, s.tp, in_tilde, t)) <= bound * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("(g4): 0 < m G <= t g inside the enlarged well") {
  for (auto s : {power_sample(), exp_sample()}) {
    double m = s.nl.superquadratic_exponent();
    for (int i = 0; i <= 60; ++i) {
      double t = std::pow(10.0, -3.0 + 4.0 * double(i) / 60.0);
      if (s.nl.variant == NonlinVariant::ExpCritical && t > 5.0) break;
      double G = G_eval(s.nl, s.tp, true, t);
      double g = g_eval(s.nl, s.tp, true, t);
      CHECK(m * G > 0.0);
      CHECK(m * G <= t * g * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("(g5): 0 < 2G <= t g <= (1/k)(1+lam V) t^2 outside") {
  for (auto s : {power_sample(), exp_sample()}) {
    for (double lam : {0.0, 1.0, 100.0}) {
      for (double V : {0.0, 0.3, 1.0}) {
        for (int i = 0; i <= 60; ++i) {
          double t = std::pow(10.0, -3.0 + 4.0 * double(i) / 60.0);
          double G = G_eval(s.nl, s.tp, false, t);
          double g = g_eval(s.nl, s.tp, false, t);
          CHECK(2.0 * G > 0.0);
          CHECK(2.0 * G <= t * g * (1.0 + 1e-12));
          double cap = (1.0 + lam * V) * t * t / s.tp.k;
          CHECK(t * g <= cap * (1.0 + 1e-12));
        }
      }
    }
  }
}

TEST_CASE("superquadraticity of f itself holds on samples") {
  auto s = exp_sample();
  for (int i = 0; i <= 40; ++i) {
    double t = std::pow(10.0, -4.0 + 4.5 * double(i) / 40.0);
    double F = s.nl.F(t);
    CHECK(s.nl.theta * F > 0.0);
    CHECK(s.nl.theta * F <= t * s.nl.f(t) * (1.0 + 1e-9));
    CHECK(s.nl.f(t) >= s.nl.nu * std::pow(t, s.nl.p) * (1.0 - 1e-12));
  }
  CHECK(s.nl.f3_empirical_constant() > 0.0);
}

TEST_CASE("potential and obstacle profiles") {
  PotentialSpec pot{1.0, 2.0, 1.6};
  CHECK(pot.value(0.0) == 0.0);
  CHECK(pot.value(1.0) == 0.0);
  CHECK(pot.value(1.5) == doctest::Approx(2.0 * 0.25));
  CHECK(pot.value(5.0) == 2.0); // capped
  pot.validate(3.0);
  CHECK_THROWS_AS(PotentialSpec({1.0, 1.0, 0.9}).validate(3.0), InvalidInput);
  CHECK_THROWS_AS(PotentialSpec({1.0, 1.0, 3.5}).validate(3.0), InvalidInput);

  ObstacleSpec obs{{0.0, 0.0, 0.0}, 0.5, 0.3, 0.1};
  CHECK(obs.value(0.0) == doctest::Approx(0.3));
  CHECK(obs.value(0.25) == 0.0);                    // rim of the bump
  CHECK(obs.value(0.3) < 0.0);                      // just outside
  CHECK(obs.value(100.0) == doctest::Approx(-0.1)); // flattened depth
  obs.validate(pot);
  ObstacleSpec escaped = obs;
  escaped.center = {0.8, 0.0, 0.0};
  CHECK_THROWS_AS(escaped.validate(pot), InvalidInput);
}
