#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace owell {

// Bad input or config: maps to CLI exit code 1.
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A solve or verification that could not meet its contract: CLI exit code 2.
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic RNG with fixed output transforms, so identical seeds give
// identical fields on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // standard normal via Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace owell
