#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "owell/grid.hpp"

using namespace owell;

namespace {

Field interior_const(const std::shared_ptr<const GridSpec>& g, double c) {
  Field u(g);
  for (std::size_t i = 0; i < g->num_nodes; ++i) u[i] = c;
  u.enforce_boundary_zero();
  return u;
}

Field coordinate_field(const std::shared_ptr<const GridSpec>& g, int axis) {
  Field u(g);
  for (std::size_t i = 0; i < g->num_nodes; ++i)
    u[i] = g->coord1d[std::size_t(g->unpack(i)[axis])];
  u.enforce_boundary_zero();
  return u;
}

Field random_interior(const std::shared_ptr<const GridSpec>& g, Rng& rng) {
  Field u(g);
  for (std::size_t i = 0; i < g->num_nodes; ++i) u[i] = 2.0 * rng.uniform() - 1.0;
  u.enforce_boundary_zero();
  return u;
}

// zero on and next to the boundary, for summation-by-parts exactness checks
Field random_compact(const std::shared_ptr<const GridSpec>& g, Rng& rng) {
  Field u = random_interior(g, rng);
  const int n = g->n;
  for (std::size_t i = 0; i < g->num_nodes; ++i) {
    auto c = g->unpack(i);
    for (int d = 0; d < g->dim; ++d)
      if (c[d] <= 1 || c[d] >= n - 2) u[i] = 0.0;
  }
  return u;
}

} // namespace

TEST_CASE("grid construction validates its invariants") {
  CHECK_THROWS_AS(GridSpec::make(4, 65, 1.0), InvalidInput);
  CHECK_THROWS_AS(GridSpec::make(2, 64, 1.0), InvalidInput); // even
  CHECK_THROWS_AS(GridSpec::make(2, 7, 1.0), InvalidInput);  // too small
  CHECK_THROWS_AS(GridSpec::make(2, 65, -1.0), InvalidInput);
  auto g = GridSpec::make(2, 65, 1.0);
  CHECK(g->spacing == doctest::Approx(2.0 / 64.0));
  CHECK(g->num_nodes == 65u * 65u);
  // origin is a node
  CHECK(g->coord1d[32] == 0.0);
}

TEST_CASE("integrate: zero, interior constant, odd symmetry") {
  auto g = GridSpec::make(2, 65, 1.0);
  CHECK(integrate(Field(g)) == 0.0);

  // interior constant on [-1,1]^2: trapezoid sum is (n-2)^2 h^2, within 0.25
  // of the box area 4
  Field u = interior_const(g, 1.0);
  double got = integrate(u);
  double closed_form = 63.0 * 63.0 * g->spacing * g->spacing;
  CHECK(got == doctest::Approx(closed_form).epsilon(1e-14));
  CHECK(std::fabs(got - 4.0) < 0.25);

  Field x1 = coordinate_field(g, 0);
  CHECK(std::fabs(integrate(x1)) <= 1e-12 * 4.0);
}

TEST_CASE("integrate is linear") {
  auto g = GridSpec::make(2, 33, 2.0);
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    Field u = random_interior(g, rng);
    Field v = random_interior(g, rng);
    double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    Field w(g);
    field_axpy(a, u, w);
    field_axpy(b, v, w);
    double lhs = integrate(w);
    double rhs = a * integrate(u) + b * integrate(v);
    double scale = std::fabs(lhs) + std::fabs(rhs) + 1.0;
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * scale);
  }
}

TEST_CASE("integrate rejects non-finite input with the node index") {
  auto g = GridSpec::make(2, 33, 1.0);
  Field u(g);
  u[5 * 33 + 7] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(integrate(u), doctest::Contains("node 172"), InvalidInput);
}

TEST_CASE("laplacian: zero field, sine eigenmode, quadratic") {
  for (int dim : {2, 3}) {
    auto g = GridSpec::make(dim, dim == 2 ? 65 : 21, 1.5);
    const double L = g->half_extent;
    CHECK(max_abs(laplacian_apply(Field(g))) == 0.0);

    // first Dirichlet mode: product of sin(pi (x_d + L) / 2L); eigenvalue of
    // the stencil is dim * (2/h^2)(1 - cos(pi h / 2L))
    Field u(g);
    for (std::size_t i = 0; i < g->num_nodes; ++i) {
      auto c = g->unpack(i);
      double v = 1.0;
      for (int d = 0; d < dim; ++d) {
        double x = g->coord1d[std::size_t(c[d])];
        v *= std::sin(M_PI * (x + L) / (2.0 * L));
      }
      u[i] = v;
    }
    u.enforce_boundary_zero();
    double h = g->spacing;
    double eig = dim * (2.0 / (h * h)) * (1.0 - std::cos(M_PI * h / (2.0 * L)));
    Field Lu = laplacian_apply(u);
    double worst = 0.0;
    for (std::size_t i = 0; i < g->num_nodes; ++i)
      worst = std::max(worst, std::fabs(Lu[i] - eig * u[i]));
    CHECK(worst <= 1e-12 * eig);

    // -Lap(x1^2) = -2 exactly away from the boundary
    Field q(g);
    for (std::size_t i = 0; i < g->num_nodes; ++i) {
      double x = g->coord1d[std::size_t(g->unpack(i)[0])];
      q[i] = x * x;
    }
    Field Lq = laplacian_apply(q);
    const int n = g->n;
    for (std::size_t i = 0; i < g->num_nodes; ++i) {
      auto c = g->unpack(i);
      bool deep = true;
      for (int d = 0; d < dim; ++d) deep = deep && c[d] >= 2 && c[d] <= n - 3;
      if (deep) CHECK(Lq[i] == doctest::Approx(-2.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("discrete Green identity: <Lap u, v>_w equals the gradient pairing") {
  Rng rng(17);
  for (int dim : {2, 3}) {
    auto g = GridSpec::make(dim, dim == 2 ? 49 : 17, 1.0);
    for (int k = 0; k < 5; ++k) {
      Field u = random_compact(g, rng);
      Field v = random_compact(g, rng);
      double lhs = integrate_product(laplacian_apply(u), v);
      double rhs = grad_pairing(u, v);
      double scale = std::fabs(lhs) + std::fabs(rhs) + 1.0;
      CHECK(std::fabs(lhs - rhs) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("norm_lambda: zero field, lam=0, monotone, quadratic identity") {
  auto g = GridSpec::make(2, 49, 2.0);
  Rng rng(5);
  std::vector<double> V(g->num_nodes);
  for (std::size_t i = 0; i < g->num_nodes; ++i) V[i] = rng.uniform();

  CHECK(norm_lambda(Field(g), 1.0, V) == 0.0);

  Field u = random_interior(g, rng);
  double h1 = std::sqrt(grad_pairing(u, u) + integrate_product(u, u));
  CHECK(norm_lambda(u, 0.0, V) == doctest::Approx(h1).epsilon(1e-14));

  double prev = norm_lambda(u, 0.0, V);
  for (double lam : {1.0, 10.0}) {
    double cur = norm_lambda(u, lam, V);
    CHECK(cur >= prev);
    prev = cur;
  }

  for (double lam : {0.5, 1.0, 10.0}) {
    double lhs = std::pow(norm_lambda(u, lam, V), 2);
    double rhs = std::pow(norm_lambda(u, 0.0, V), 2) +
                 lam * integrate_product3(*g, V.data(), u.data(), u.data());
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * (std::fabs(lhs) + std::fabs(rhs)));
  }

  std::vector<double> Vbad = V;
  Vbad[100] = -0.1;
  CHECK_THROWS_AS(norm_lambda(u, 1.0, Vbad), InvalidInput);
}

TEST_CASE("tail_mass: compact support, interior constant, monotone in R") {
  auto g = GridSpec::make(2, 65, 1.0);
  const double R = 0.5;

  // supported in B(0, R/2)
  Field u(g);
  for (std::size_t i = 0; i < g->num_nodes; ++i) {
    double r2 = g->radius2(g->unpack(i));
    u[i] = r2 < (R / 2) * (R / 2) ? 1.0 - r2 : 0.0;
  }
  u.enforce_boundary_zero();
  CHECK(tail_mass(u, R) == 0.0);

  // interior constant: density reduces to c^2 over the box minus the disk
  Field c = interior_const(g, 0.7);
  double expected = (4.0 - M_PI * R * R) * 0.49;
  double tol = 2.0 * g->spacing * 8.0; // 2h * box perimeter
  CHECK(std::fabs(tail_mass(c, R) - expected) <= tol);

  Rng rng(23);
  Field w = random_interior(g, rng);
  double prev = tail_mass(w, 0.1);
  for (double r : {0.25, 0.5, 0.75, 0.9}) {
    double cur = tail_mass(w, r);
    CHECK(cur <= prev);
    prev = cur;
  }

  CHECK_THROWS_AS(tail_mass(w, 1.0), InvalidInput);
  CHECK_THROWS_AS(tail_mass(w, -0.5), InvalidInput);
}

TEST_CASE("operations keep boundary values exactly zero") {
  Rng rng(31);
  auto g = GridSpec::make(3, 13, 1.0);
  Field u = random_interior(g, rng);
  Field v = random_interior(g, rng);
  Field lap = laplacian_apply(u);
  field_axpy(0.3, v, u);
  const int n = g->n;
  for (std::size_t i = 0; i < g->num_nodes; ++i) {
    auto c = g->unpack(i);
    bool boundary = false;
    for (int d = 0; d < g->dim; ++d)
      boundary = boundary || c[d] == 0 || c[d] == n - 1;
    if (boundary) {
      CHECK(u[i] == 0.0);
      CHECK(lap[i] == 0.0);
    }
  }
}
