#pragma once

#include <cstddef>

namespace owell::kern {

// Data-parallel inner loops used by the grid and energy code. Every backend
// evaluates the same expression tree: reductions accumulate 8-element blocks
// with a fixed pairwise pattern and combine block partials through a shared
// binary counter, so scalar and SIMD results are bit-identical. Elementwise
// kernels round identically by construction.
struct Backend {
  const char* name;

  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*dot3)(const double* x, const double* y, const double* z, std::size_t n);
  // sum of (x[i+off]-x[i]) * (y[i+off]-y[i]) over i in [0, n)
  double (*diff_dot)(const double* x, const double* y, std::size_t off, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scale)(double a, double* x, std::size_t n);
  // out[i] = max(a[i]-b[i], 0)
  void (*sub_relu)(const double* a, const double* b, double* out, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  // out[i] = (4*u0[i] - ((u0[i-1]+u0[i+1]) + (um[i]+up[i]))) * inv_h2, i in [1, n-1)
  void (*stencil_row2)(double* out, const double* u0, const double* um,
                       const double* up, std::size_t n, double inv_h2);
  // 3-d analogue with neighbor rows along the two slow axes
  void (*stencil_row3)(double* out, const double* u0, const double* uym,
                       const double* uyp, const double* uzm, const double* uzp,
                       std::size_t n, double inv_h2);
};

const Backend& scalar_backend();

bool avx2_available();
const Backend* avx2_backend(); // nullptr when not compiled in

bool neon_available();
const Backend* neon_backend();

// Backend picked once per process: the widest supported SIMD variant, unless
// OBSTACLE_WELL_KERNELS={scalar,avx2,neon} forces one.
const Backend& active();

} // namespace owell::kern
