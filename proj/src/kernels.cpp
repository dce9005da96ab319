#include "owell/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "kernels_detail.hpp"

namespace owell::kern {

using detail::PairwiseAcc;
using detail::tree8;

namespace {

double s_sum(const double* x, std::size_t n) {
  PairwiseAcc acc;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) acc.push(tree8(x + i));
  if (i < n) {
    double t = 0.0;
    for (; i < n; ++i) t += x[i];
    acc.push(t);
  }
  return acc.result();
}

double s_dot(const double* x, const double* y, std::size_t n) {
  PairwiseAcc acc;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    double p[8];
    for (int k = 0; k < 8; ++k) p[k] = x[i + k] * y[i + k];
    acc.push(tree8(p));
  }
  if (i < n) {
    double t = 0.0;
    for (; i < n; ++i) t += x[i] * y[i];
    acc.push(t);
  }
  return acc.result();
}

double s_dot3(const double* x, const double* y, const double* z, std::size_t n) {
  PairwiseAcc acc;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    double p[8];
    for (int k = 0; k < 8; ++k) p[k] = (x[i + k] * y[i + k]) * z[i + k];
    acc.push(tree8(p));
  }
  if (i < n) {
    double t = 0.0;
    for (; i < n; ++i) t += (x[i] * y[i]) * z[i];
    acc.push(t);
  }
  return acc.result();
}

double s_diff_dot(const double* x, const double* y, std::size_t off, std::size_t n) {
  PairwiseAcc acc;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    double p[8];
    for (int k = 0; k < 8; ++k)
      p[k] = (x[i + k + off] - x[i + k]) * (y[i + k + off] - y[i + k]);
    acc.push(tree8(p));
  }
  if (i < n) {
    double t = 0.0;
    for (; i < n; ++i) t += (x[i + off] - x[i]) * (y[i + off] - y[i]);
    acc.push(t);
  }
  return acc.result();
}

void s_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void s_scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void s_sub_relu(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    out[i] = d > 0.0 ? d : 0.0;
  }
}

double s_max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double a = std::fabs(x[i]);
    if (a > m) m = a;
  }
  return m;
}

void s_stencil_row2(double* out, const double* u0, const double* um,
                    const double* up, std::size_t n, double inv_h2) {
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double t1 = u0[i - 1] + u0[i + 1];
    double t2 = um[i] + up[i];
    out[i] = (4.0 * u0[i] - (t1 + t2)) * inv_h2;
  }
}

void s_stencil_row3(double* out, const double* u0, const double* uym,
                    const double* uyp, const double* uzm, const double* uzp,
                    std::size_t n, double inv_h2) {
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double t1 = u0[i - 1] + u0[i + 1];
    double t2 = uym[i] + uyp[i];
    double t3 = uzm[i] + uzp[i];
    out[i] = (6.0 * u0[i] - ((t1 + t2) + t3)) * inv_h2;
  }
}

const Backend scalar{
    "scalar",       s_sum,   s_dot,     s_dot3,    s_diff_dot,     s_axpy,
    s_scale,        s_sub_relu, s_max_abs, s_stencil_row2, s_stencil_row3};

const Backend* pick() {
  const char* force = std::getenv("OBSTACLE_WELL_KERNELS");
  if (force) {
    std::string f(force);
    if (f == "scalar") return &scalar;
    if (f == "avx2" && avx2_backend()) return avx2_backend();
    if (f == "neon" && neon_backend()) return neon_backend();
    return &scalar; // unknown value: safest choice
  }
  if (const Backend* b = avx2_backend()) return b;
  if (const Backend* b = neon_backend()) return b;
  return &scalar;
}

} // namespace

const Backend& scalar_backend() { return scalar; }

const Backend& active() {
  static const Backend* chosen = pick();
  return *chosen;
}

#if !defined(__x86_64__) && !defined(_M_X64)
bool avx2_available() { return false; }
const Backend* avx2_backend() { return nullptr; }
#endif

#if !defined(__aarch64__)
bool neon_available() { return false; }
const Backend* neon_backend() { return nullptr; }
#endif

} // namespace owell::kern
