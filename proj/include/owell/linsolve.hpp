#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "owell/kernels.hpp"

namespace owell {

// Matrix-free Krylov solvers on nodal vectors. Operators map the
// zero-boundary subspace into itself and are symmetric in the Euclidean
// inner product.

struct KrylovStats {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Preconditioned conjugate gradients for SPD A; inv_diag is the Jacobi
// preconditioner (entries may be zero on boundary rows).
template <class Op>
KrylovStats cg_solve(const Op& A, const std::vector<double>& b,
                     std::vector<double>& x, const std::vector<double>& inv_diag,
                     double rel_tol, int max_iter) {
  const auto& k = kern::active();
  const std::size_t n = b.size();
  std::vector<double> r(n), z(n), p(n), Ap(n);

  A(x, Ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = k.dot(r.data(), z.data(), n);
  double rn0 = std::sqrt(k.dot(r.data(), r.data(), n));
  KrylovStats st;
  if (rn0 == 0.0) {
    st.converged = true;
    return st;
  }
  for (int it = 0; it < max_iter; ++it) {
    A(p, Ap);
    double pAp = k.dot(p.data(), Ap.data(), n);
    if (!(pAp > 0.0)) break; // loss of positivity
    double alpha = rz / pAp;
    k.axpy(alpha, p.data(), x.data(), n);
    k.axpy(-alpha, Ap.data(), r.data(), n);
    st.iterations = it + 1;
    double rn = std::sqrt(k.dot(r.data(), r.data(), n));
    st.rel_residual = rn / rn0;
    if (rn <= rel_tol * rn0) {
      st.converged = true;
      return st;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    double rz_new = k.dot(r.data(), z.data(), n);
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return st;
}

// Preconditioned MINRES for symmetric (possibly indefinite) A with SPD
// Jacobi preconditioner; follows the Paige-Saunders recurrence.
template <class Op>
KrylovStats minres_solve(const Op& A, const std::vector<double>& b,
                         std::vector<double>& x,
                         const std::vector<double>& inv_diag, double rel_tol,
                         int max_iter) {
  const auto& k = kern::active();
  const std::size_t n = b.size();
  std::vector<double> r1(n), r2(n), y(n), v(n), w(n, 0.0), w1(n, 0.0), w2(n, 0.0);

  A(x, y);
  for (std::size_t i = 0; i < n; ++i) r2[i] = b[i] - y[i];
  r1 = r2;
  for (std::size_t i = 0; i < n; ++i) y[i] = inv_diag[i] * r2[i];
  double beta1 = k.dot(r2.data(), y.data(), n);
  KrylovStats st;
  if (!(beta1 > 0.0)) {
    st.converged = (beta1 == 0.0);
    return st;
  }
  beta1 = std::sqrt(beta1);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0, oldeps = 0.0;

  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / beta;
    A(v, y);
    if (it >= 1) k.axpy(-beta / oldb, r1.data(), y.data(), n);
    double alfa = k.dot(v.data(), y.data(), n);
    k.axpy(-alfa / beta, r2.data(), y.data(), n);
    r1 = r2;
    r2 = y;
    for (std::size_t i = 0; i < n; ++i) y[i] = inv_diag[i] * r2[i];
    oldb = beta;
    double bb = k.dot(r2.data(), y.data(), n);
    beta = bb > 0.0 ? std::sqrt(bb) : 0.0;

    oldeps = epsln;
    double delta = cs * dbar + sn * alfa;
    double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    if (gamma < 1e-300) gamma = 1e-300;
    cs = gbar / gamma;
    sn = beta / gamma;
    double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    for (std::size_t i = 0; i < n; ++i)
      w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
    k.axpy(phi, w.data(), x.data(), n);

    st.iterations = it + 1;
    st.rel_residual = phibar / beta1;
    if (st.rel_residual <= rel_tol) {
      st.converged = true;
      return st;
    }
    if (beta == 0.0) {
      st.converged = true;
      return st;
    }
  }
  return st;
}

} // namespace owell
