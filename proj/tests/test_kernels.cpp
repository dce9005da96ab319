#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "owell/common.hpp"
#include "owell/kernels.hpp"

using namespace owell;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double amp = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = amp * (2.0 * rng.uniform() - 1.0);
  return v;
}

} // namespace

TEST_CASE("backends agree bit-exactly on reductions") {
  const kern::Backend& ref = kern::scalar_backend();
  const kern::Backend& act = kern::active();
  INFO("active backend: ", act.name);
  Rng rng(42);
  for (std::size_t n : {0ul, 1ul, 7ul, 8ul, 9ul, 64ul, 1000ul, 35937ul}) {
    auto x = random_vec(rng, n);
    auto y = random_vec(rng, n);
    auto z = random_vec(rng, n);
    CHECK(ref.sum(x.data(), n) == act.sum(x.data(), n));
    CHECK(ref.dot(x.data(), y.data(), n) == act.dot(x.data(), y.data(), n));
    CHECK(ref.dot3(x.data(), y.data(), z.data(), n) ==
          act.dot3(x.data(), y.data(), z.data(), n));
    CHECK(ref.max_abs(x.data(), n) == act.max_abs(x.data(), n));
    if (n >= 9) {
      CHECK(ref.diff_dot(x.data(), y.data(), 3, n - 3) ==
            act.diff_dot(x.data(), y.data(), 3, n - 3));
    }
  }
}

TEST_CASE("backends agree bit-exactly on elementwise kernels") {
  const kern::Backend& ref = kern::scalar_backend();
  const kern::Backend& act = kern::active();
  Rng rng(7);
  for (std::size_t n : {1ul, 5ul, 8ul, 33ul, 4097ul}) {
    auto x = random_vec(rng, n);
    auto y0 = random_vec(rng, n);
    auto y1 = y0;
    ref.axpy(0.37, x.data(), y0.data(), n);
    act.axpy(0.37, x.data(), y1.data(), n);
    CHECK(y0 == y1);

    auto s0 = x, s1 = x;
    ref.scale(-1.71, s0.data(), n);
    act.scale(-1.71, s1.data(), n);
    CHECK(s0 == s1);

    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    std::vector<double> o0(n), o1(n);
    ref.sub_relu(a.data(), b.data(), o0.data(), n);
    act.sub_relu(a.data(), b.data(), o1.data(), n);
    CHECK(o0 == o1);
    for (std::size_t i = 0; i < n; ++i) CHECK(o0[i] >= 0.0);
  }
}

TEST_CASE("backends agree bit-exactly on stencil rows") {
  const kern::Backend& ref = kern::scalar_backend();
  const kern::Backend& act = kern::active();
  Rng rng(11);
  const std::size_t n = 129;
  auto u0 = random_vec(rng, n);
  auto um = random_vec(rng, n);
  auto up = random_vec(rng, n);
  auto vm = random_vec(rng, n);
  auto vp = random_vec(rng, n);
  std::vector<double> o0(n, 0.0), o1(n, 0.0);
  ref.stencil_row2(o0.data(), u0.data(), um.data(), up.data(), n, 113.77);
  act.stencil_row2(o1.data(), u0.data(), um.data(), up.data(), n, 113.77);
  CHECK(o0 == o1);
  ref.stencil_row3(o0.data(), u0.data(), um.data(), up.data(), vm.data(),
                   vp.data(), n, 113.77);
  act.stencil_row3(o1.data(), u0.data(), um.data(), up.data(), vm.data(),
                   vp.data(), n, 113.77);
  CHECK(o0 == o1);
}

TEST_CASE("pairwise sum tracks a long-double reference") {
  Rng rng(99);
  const std::size_t n = 200000;
  auto x = random_vec(rng, n);
  long double ref = 0.0L;
  for (double v : x) ref += static_cast<long double>(v);
  double got = kern::active().sum(x.data(), n);
  double scale = 0.0;
  for (double v : x) scale += std::fabs(v);
  CHECK(std::fabs(got - double(ref)) <= 1e-14 * scale);
}

TEST_CASE("simd backend is exercised when the host supports it") {
  if (kern::avx2_available()) {
    REQUIRE(kern::avx2_backend() != nullptr);
    CHECK(std::string(kern::avx2_backend()->name) == "avx2");
  }
  if (kern::neon_available()) REQUIRE(kern::neon_backend() != nullptr);
}
