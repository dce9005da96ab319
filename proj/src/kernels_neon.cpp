#include "owell/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include "kernels_detail.hpp"

namespace owell::kern {

using detail::PairwiseAcc;

namespace {

// vpaddq on 2-lane vectors reproduces tree8 exactly:
// q0=[x0+x1, x2+x3], q1=[x4+x5, x6+x7], r=[q0l+q0h, q1l+q1h].
inline double block8(float64x2_t v0, float64x2_t v1, float64x2_t v2, float64x2_t v3) {
  float64x2_t q0 = vpaddq_f64(v0, v1);
  float64x2_t q1 = vpaddq_f64(v2, v3);
  float64x2_t r = vpaddq_f64(q0, q1);
  return vgetq_lane_f64(r, 0) + vgetq_lane_f64(r, 1);
}

double v_sum(const double* x, std::size_t n) {
  PairwiseAcc acc;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc.push(block8(vld1q_f64(x + i), vld1q_f64(x + i + 2), vld1q_f64(x + i + 4),
                    vld1q_f64(x + i + 6)));
  if (i < n) {
    double t = 0.0;
    for (; i < n; ++i) t += x[i];
    acc.push(t);
  }
  return acc.result();
}

double v_dot(const double* x, const double* y, std::size_t n) {
  PairwiseAcc acc;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    float64x2_t p0 = vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    float64x2_t p1 = vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    float64x2_t p2 = vmulq_f64(vld1q_f64(x + i + 4), vld1q_f64(y + i + 4));
    float64x2_t p3 = vmulq_f64(vld1q_f64(x + i + 6), vld1q_f64(y + i + 6));
    acc.push(block8(p0, p1, p2, p3));
  }
  if (i < n) {
    double t = 0.0;
    for (; i < n; ++i) t += x[i] * y[i];
    acc.push(t);
  }
  return acc.result();
}

double v_dot3(const double* x, const double* y, const double* z, std::size_t n) {
  PairwiseAcc acc;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    float64x2_t p0 = vmulq_f64(vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)), vld1q_f64(z + i));
    float64x2_t p1 = vmulq_f64(vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)), vld1q_f64(z + i + 2));
    float64x2_t p2 = vmulq_f64(vmulq_f64(vld1q_f64(x + i + 4), vld1q_f64(y + i + 4)), vld1q_f64(z + i + 4));
    float64x2_t p3 = vmulq_f64(vmulq_f64(vld1q_f64(x + i + 6), vld1q_f64(y + i + 6)), vld1q_f64(z + i + 6));
    acc.push(block8(p0, p1, p2, p3));
  }
  if (i < n) {
    double t = 0.0;
    for (; i < n; ++i) t += (x[i] * y[i]) * z[i];
    acc.push(t);
  }
  return acc.result();
}

double v_diff_dot(const double* x, const double* y, std::size_t off, std::size_t n) {
  PairwiseAcc acc;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    float64x2_t p[4];
    for (int k = 0; k < 4; ++k) {
      float64x2_t dx = vsubq_f64(vld1q_f64(x + i + 2 * k + off), vld1q_f64(x + i + 2 * k));
      float64x2_t dy = vsubq_f64(vld1q_f64(y + i + 2 * k + off), vld1q_f64(y + i + 2 * k));
      p[k] = vmulq_f64(dx, dy);
    }
    acc.push(block8(p[0], p[1], p[2], p[3]));
  }
  if (i < n) {
    double t = 0.0;
    for (; i < n; ++i) t += (x[i + off] - x[i]) * (y[i + off] - y[i]);
    acc.push(t);
  }
  return acc.result();
}

void v_axpy(double a, const double* x, double* y, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void v_scale(double a, double* x, std::size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void v_sub_relu(const double* a, const double* b, double* out, std::size_t n) {
  float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vmaxq_f64(vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)), zero));
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    out[i] = d > 0.0 ? d : 0.0;
  }
}

double v_max_abs(const double* x, std::size_t n) {
  float64x2_t vm = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vm = vmaxq_f64(vm, vabsq_f64(vld1q_f64(x + i)));
  double m = vgetq_lane_f64(vm, 0);
  double m1 = vgetq_lane_f64(vm, 1);
  if (m1 > m) m = m1;
  for (; i < n; ++i) {
    double a = x[i] < 0.0 ? -x[i] : x[i];
    if (a > m) m = a;
  }
  return m;
}

void v_stencil_row2(double* out, const double* u0, const double* um,
                    const double* up, std::size_t n, double inv_h2) {
  float64x2_t c = vdupq_n_f64(4.0);
  float64x2_t ih = vdupq_n_f64(inv_h2);
  std::size_t i = 1;
  for (; i + 2 <= n - 1; i += 2) {
    float64x2_t t1 = vaddq_f64(vld1q_f64(u0 + i - 1), vld1q_f64(u0 + i + 1));
    float64x2_t t2 = vaddq_f64(vld1q_f64(um + i), vld1q_f64(up + i));
    float64x2_t v = vsubq_f64(vmulq_f64(c, vld1q_f64(u0 + i)), vaddq_f64(t1, t2));
    vst1q_f64(out + i, vmulq_f64(v, ih));
  }
  for (; i + 1 < n; ++i) {
    double t1 = u0[i - 1] + u0[i + 1];
    double t2 = um[i] + up[i];
    out[i] = (4.0 * u0[i] - (t1 + t2)) * inv_h2;
  }
}

void v_stencil_row3(double* out, const double* u0, const double* uym,
                    const double* uyp, const double* uzm, const double* uzp,
                    std::size_t n, double inv_h2) {
  float64x2_t c = vdupq_n_f64(6.0);
  float64x2_t ih = vdupq_n_f64(inv_h2);
  std::size_t i = 1;
  for (; i + 2 <= n - 1; i += 2) {
    float64x2_t t1 = vaddq_f64(vld1q_f64(u0 + i - 1), vld1q_f64(u0 + i + 1));
    float64x2_t t2 = vaddq_f64(vld1q_f64(uym + i), vld1q_f64(uyp + i));
    float64x2_t t3 = vaddq_f64(vld1q_f64(uzm + i), vld1q_f64(uzp + i));
    float64x2_t v = vsubq_f64(vmulq_f64(c, vld1q_f64(u0 + i)),
                              vaddq_f64(vaddq_f64(t1, t2), t3));
    vst1q_f64(out + i, vmulq_f64(v, ih));
  }
  for (; i + 1 < n; ++i) {
    double t1 = u0[i - 1] + u0[i + 1];
    double t2 = uym[i] + uyp[i];
    double t3 = uzm[i] + uzp[i];
    out[i] = (6.0 * u0[i] - ((t1 + t2) + t3)) * inv_h2;
  }
}

const Backend neon{
    "neon",         v_sum,   v_dot,     v_dot3,    v_diff_dot,     v_axpy,
    v_scale,        v_sub_relu, v_max_abs, v_stencil_row2, v_stencil_row3};

} // namespace

bool neon_available() { return true; }

const Backend* neon_backend() { return &neon; }

} // namespace owell::kern

#endif // __aarch64__
