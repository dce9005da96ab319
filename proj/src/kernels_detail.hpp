#pragma once

#include <cstddef>
#include <cstdint>

// Shared reduction plumbing. Each backend produces one partial per 8-element
// block (plus one scalar partial for the tail) and feeds them through this
// accumulator; the combine order is therefore identical everywhere.

namespace owell::kern::detail {

struct PairwiseAcc {
  double level[64];
  std::uint64_t occupied = 0;

  inline void push(double p) {
    int lv = 0;
    while (occupied & (std::uint64_t(1) << lv)) {
      p = level[lv] + p;
      occupied &= ~(std::uint64_t(1) << lv);
      ++lv;
    }
    level[lv] = p;
    occupied |= std::uint64_t(1) << lv;
  }

  inline double result() const {
    double r = 0.0;
    for (int lv = 0; lv < 64; ++lv)
      if (occupied & (std::uint64_t(1) << lv)) r += level[lv];
    return r;
  }
};

// Fixed tree for one block: ((p0+p1)+(p2+p3)) + ((p4+p5)+(p6+p7)).
inline double tree8(const double* p) {
  return ((p[0] + p[1]) + (p[2] + p[3])) + ((p[4] + p[5]) + (p[6] + p[7]));
}

} // namespace owell::kern::detail
