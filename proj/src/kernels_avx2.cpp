#include "owell/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "kernels_detail.hpp"

namespace owell::kern {

using detail::PairwiseAcc;

namespace {

// Horizontal reduction of two 4-lane vectors holding elements 0..3 and 4..7,
// matching tree8: ((p0+p1)+(p2+p3)) + ((p4+p5)+(p6+p7)).
inline double block8(__m256d a, __m256d b) {
  __m256d h = _mm256_hadd_pd(a, b);               // [a0+a1, b0+b1, a2+a3, b2+b3]
  __m128d lo = _mm256_castpd256_pd128(h);
  __m128d hi = _mm256_extractf128_pd(h, 1);
  __m128d s = _mm_add_pd(lo, hi);                 // [(a0+a1)+(a2+a3), (b0+b1)+(b2+b3)]
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

double v_sum(const double* x, std::size_t n) {
  PairwiseAcc acc;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc.push(block8(_mm256_loadu_pd(x + i), _mm256_loadu_pd(x + i + 4)));
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
    __m256d a = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    __m256d b = _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4));
    acc.push(block8(a, b));
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
    __m256d a = _mm256_mul_pd(
        _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)),
        _mm256_loadu_pd(z + i));
    __m256d b = _mm256_mul_pd(
        _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)),
        _mm256_loadu_pd(z + i + 4));
    acc.push(block8(a, b));
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
    __m256d dx0 = _mm256_sub_pd(_mm256_loadu_pd(x + i + off), _mm256_loadu_pd(x + i));
    __m256d dy0 = _mm256_sub_pd(_mm256_loadu_pd(y + i + off), _mm256_loadu_pd(y + i));
    __m256d dx1 = _mm256_sub_pd(_mm256_loadu_pd(x + i + 4 + off), _mm256_loadu_pd(x + i + 4));
    __m256d dy1 = _mm256_sub_pd(_mm256_loadu_pd(y + i + 4 + off), _mm256_loadu_pd(y + i + 4));
    acc.push(block8(_mm256_mul_pd(dx0, dy0), _mm256_mul_pd(dx1, dy1)));
  }
  if (i < n) {
    double t = 0.0;
    for (; i < n; ++i) t += (x[i + off] - x[i]) * (y[i + off] - y[i]);
    acc.push(t);
  }
  return acc.result();
}

void v_axpy(double a, const double* x, double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_add_pd(_mm256_loadu_pd(y + i),
                              _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, t);
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void v_scale(double a, double* x, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void v_sub_relu(const double* a, const double* b, double* out, std::size_t n) {
  __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_max_pd(d, zero));
  }
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    out[i] = d > 0.0 ? d : 0.0;
  }
}

double v_max_abs(const double* x, std::size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d vm = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vm = _mm256_max_pd(vm, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
  __m128d lo = _mm256_castpd256_pd128(vm);
  __m128d hi = _mm256_extractf128_pd(vm, 1);
  __m128d m2 = _mm_max_pd(lo, hi);
  double m = _mm_cvtsd_f64(_mm_max_sd(m2, _mm_unpackhi_pd(m2, m2)));
  for (; i < n; ++i) {
    double a = x[i] < 0.0 ? -x[i] : x[i];
    if (a > m) m = a;
  }
  return m;
}

void v_stencil_row2(double* out, const double* u0, const double* um,
                    const double* up, std::size_t n, double inv_h2) {
  const __m256d c = _mm256_set1_pd(4.0);
  const __m256d ih = _mm256_set1_pd(inv_h2);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    __m256d t1 = _mm256_add_pd(_mm256_loadu_pd(u0 + i - 1), _mm256_loadu_pd(u0 + i + 1));
    __m256d t2 = _mm256_add_pd(_mm256_loadu_pd(um + i), _mm256_loadu_pd(up + i));
    __m256d v = _mm256_sub_pd(_mm256_mul_pd(c, _mm256_loadu_pd(u0 + i)),
                              _mm256_add_pd(t1, t2));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(v, ih));
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
  const __m256d c = _mm256_set1_pd(6.0);
  const __m256d ih = _mm256_set1_pd(inv_h2);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    __m256d t1 = _mm256_add_pd(_mm256_loadu_pd(u0 + i - 1), _mm256_loadu_pd(u0 + i + 1));
    __m256d t2 = _mm256_add_pd(_mm256_loadu_pd(uym + i), _mm256_loadu_pd(uyp + i));
    __m256d t3 = _mm256_add_pd(_mm256_loadu_pd(uzm + i), _mm256_loadu_pd(uzp + i));
    __m256d v = _mm256_sub_pd(_mm256_mul_pd(c, _mm256_loadu_pd(u0 + i)),
                              _mm256_add_pd(_mm256_add_pd(t1, t2), t3));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(v, ih));
  }
  for (; i + 1 < n; ++i) {
    double t1 = u0[i - 1] + u0[i + 1];
    double t2 = uym[i] + uyp[i];
    double t3 = uzm[i] + uzp[i];
    out[i] = (6.0 * u0[i] - ((t1 + t2) + t3)) * inv_h2;
  }
}

const Backend avx2{
    "avx2",         v_sum,   v_dot,     v_dot3,    v_diff_dot,     v_axpy,
    v_scale,        v_sub_relu, v_max_abs, v_stencil_row2, v_stencil_row3};

} // namespace

bool avx2_available() { return __builtin_cpu_supports("avx2"); }

const Backend* avx2_backend() { return avx2_available() ? &avx2 : nullptr; }

} // namespace owell::kern

#endif // x86_64
