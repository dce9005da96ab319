#include "owell/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace owell {

namespace {

constexpr double kExpCap = 700.0; // exponent cap before the overflow sentinel

double ipow(double t, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= t;
  return r;
}

bool is_int(double x) { return x == std::floor(x) && std::fabs(x) < 64.0; }

double rpow(double t, double e) {
  if (is_int(e)) return ipow(t, int(e));
  return std::pow(t, e);
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr int kGL = 16;
constexpr double kGLx[kGL] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
    -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
    -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
    0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
    0.9894009349916499};
constexpr double kGLw[kGL] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
    0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
    0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
    0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
    0.0271524594117541};

} // namespace

// Cumulative primitive of f(t) = nu t^p e^(alpha0 t^2), held as log F on a
// log-spaced knot grid with exact nodal slopes; built once per spec and
// shared read-only across evaluations.
class ExpPrimitiveTable {
public:
  ExpPrimitiveTable(double nu, double p, double alpha0)
      : nu_(nu), p_(p), alpha0_(alpha0), t_lo_(1e-3),
        t_hi_(std::sqrt(kExpCap / alpha0)), knots_(4096) {
    s_lo_ = std::log(t_lo_);
    ds_ = (std::log(t_hi_) - s_lo_) / double(knots_ - 1);
    logF_.resize(knots_);
    dlogF_.resize(knots_);
    logF_[0] = std::log(series(t_lo_));
    const double log_nu = std::log(nu_);
    for (std::size_t i = 0; i + 1 < knots_; ++i) {
      double sa = s_lo_ + ds_ * double(i);
      // integral of f over [t_i, t_{i+1}] in log space: integrand
      // nu e^((p+1)s + alpha0 e^(2s)), accumulated with log-sum-exp
      double inc = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < kGL; ++j) {
        double s = sa + 0.5 * ds_ * (kGLx[j] + 1.0);
        double t = std::exp(s);
        double term = std::log(kGLw[j] * 0.5 * ds_) + log_nu + (p_ + 1.0) * s +
                      alpha0_ * t * t;
        inc = log_add_exp(inc, term);
      }
      logF_[i + 1] = log_add_exp(logF_[i], inc);
    }
    for (std::size_t i = 0; i < knots_; ++i) {
      double s = s_lo_ + ds_ * double(i);
      double t = std::exp(s);
      // d log F / d s = t f(t) / F(t)
      dlogF_[i] = std::exp(log_nu + (p_ + 1.0) * s + alpha0_ * t * t - logF_[i]);
    }
  }

  double eval(double t) const {
    if (t <= 0.0) return 0.0;
    if (t < t_lo_) return series(t);
    if (t > t_hi_) return std::numeric_limits<double>::infinity();
    double s = std::log(t);
    double x = (s - s_lo_) / ds_;
    std::size_t i = std::min(std::size_t(x), knots_ - 2);
    double u = x - double(i);
    double y0 = logF_[i], y1 = logF_[i + 1];
    double m0 = dlogF_[i] * ds_, m1 = dlogF_[i + 1] * ds_;
    double u2 = u * u, u3 = u2 * u;
    double logF = (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 +
                  (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1;
    return std::exp(logF);
  }

  double t_cap() const { return t_hi_; }

private:
  double series(double t) const {
    double a2 = alpha0_ * t * t;
    return nu_ * std::pow(t, p_ + 1.0) *
           (1.0 / (p_ + 1.0) + a2 / (p_ + 3.0) + a2 * a2 / (2.0 * (p_ + 5.0)) +
            a2 * a2 * a2 / (6.0 * (p_ + 7.0)));
  }

  double nu_, p_, alpha0_;
  double t_lo_, t_hi_, s_lo_, ds_;
  std::size_t knots_;
  std::vector<double> logF_, dlogF_;
};

void PotentialSpec::validate(double half_extent) const {
  if (!(well_radius > 0.0)) throw InvalidInput("potential: well_radius must be > 0");
  if (scale < 0.0) throw InvalidInput("potential: scale must be >= 0");
  if (!(tilde_radius > well_radius))
    throw InvalidInput("potential: tilde_radius must exceed well_radius");
  if (!(tilde_radius < half_extent))
    throw InvalidInput("potential: tilde_radius must be strictly inside the box");
}

void ObstacleSpec::validate(const PotentialSpec& pot) const {
  if (!(radius > 0.0)) throw InvalidInput("obstacle: radius must be > 0");
  if (!(height > 0.0)) throw InvalidInput("obstacle: height must be > 0");
  if (outside_depth < 0.0) throw InvalidInput("obstacle: outside_depth must be >= 0");
  double c = 0.0;
  for (double x : center) c += x * x;
  if (std::sqrt(c) + radius >= pot.well_radius)
    throw InvalidInput("obstacle: support ball must sit inside the well");
}

NonlinearitySpec NonlinearitySpec::power_critical(int dim, double mu, double q) {
  NonlinearitySpec nl;
  nl.variant = NonlinVariant::PowerCritical;
  nl.dim = dim;
  nl.mu = mu;
  nl.q = q;
  nl.validate_and_finish();
  return nl;
}

NonlinearitySpec NonlinearitySpec::exp_critical(int dim, double nu, double p,
                                                double alpha0, double theta) {
  NonlinearitySpec nl;
  nl.variant = NonlinVariant::ExpCritical;
  nl.dim = dim;
  nl.nu = nu;
  nl.p = p;
  nl.alpha0 = alpha0;
  nl.theta = theta;
  nl.validate_and_finish();
  return nl;
}

void NonlinearitySpec::validate_and_finish() {
  if (variant == NonlinVariant::PowerCritical) {
    if (dim < 3)
      throw InvalidInput("nonlinearity: power_critical requires dimension >= 3");
    if (!(mu > 0.0)) throw InvalidInput("nonlinearity: mu must be > 0");
    if (!(q > 2.0 && q < two_star()))
      throw InvalidInput("nonlinearity: q must lie in (2, 2*)");
  } else {
    if (dim != 2)
      throw InvalidInput("nonlinearity: exp_critical requires dimension 2");
    if (!(nu > 0.0)) throw InvalidInput("nonlinearity: nu must be > 0");
    if (!(p > 1.0)) throw InvalidInput("nonlinearity: p must be > 1");
    if (!(alpha0 > 0.0)) throw InvalidInput("nonlinearity: alpha0 must be > 0");
    if (!(theta > 2.0)) throw InvalidInput("nonlinearity: theta must be > 2");
    if (theta > p + 1.0)
      throw InvalidInput("nonlinearity: theta must not exceed p+1");
    table_ = std::make_shared<const ExpPrimitiveTable>(nu, p, alpha0);
    // superquadraticity 0 < theta F(t) <= t f(t), checked on a log-spaced sample
    for (int i = 0; i <= 60; ++i) {
      double t = std::pow(10.0, -6.0 + 0.15 * double(i)); // up to ~1e3
      if (t > 0.9 * table_->t_cap()) break;
      double Ft = F(t), ft = f(t);
      if (!(theta * Ft > 0.0) || theta * Ft > t * ft * (1.0 + 1e-9))
        throw InvalidInput("nonlinearity: superquadraticity check failed at t=" +
                           std::to_string(t));
    }
  }
}

double NonlinearitySpec::f(double t) const {
  if (t <= 0.0) return 0.0;
  if (variant == NonlinVariant::PowerCritical)
    return mu * rpow(t, q - 1.0) + rpow(t, two_star() - 1.0);
  double e = alpha0 * t * t;
  if (e > kExpCap) return std::numeric_limits<double>::infinity();
  return nu * rpow(t, p) * std::exp(e);
}

double NonlinearitySpec::fprime(double t) const {
  if (t <= 0.0) return 0.0;
  if (variant == NonlinVariant::PowerCritical)
    return mu * (q - 1.0) * rpow(t, q - 2.0) +
           (two_star() - 1.0) * rpow(t, two_star() - 2.0);
  double e = alpha0 * t * t;
  if (e > kExpCap) return std::numeric_limits<double>::infinity();
  return nu * rpow(t, p - 1.0) * std::exp(e) * (p + 2.0 * alpha0 * t * t);
}

double NonlinearitySpec::F(double t) const {
  if (t <= 0.0) return 0.0;
  if (variant == NonlinVariant::PowerCritical)
    return mu * rpow(t, q) / q + rpow(t, two_star()) / two_star();
  return table_->eval(t);
}

double NonlinearitySpec::small_slope_threshold(double bound) const {
  double lo = 1e-14, hi = 10.0;
  if (f(hi) / hi <= bound) return hi;
  for (int i = 0; i < 200; ++i) {
    double mid = std::sqrt(lo * hi);
    (f(mid) / mid <= bound ? lo : hi) = mid;
  }
  return lo;
}

double NonlinearitySpec::f3_empirical_constant() const {
  double best = 0.0;
  for (int i = 0; i <= 400; ++i) {
    double t = 1e-4 * std::pow(10.0, 6.0 * double(i) / 400.0);
    double v = fprime(t) * std::exp(-alpha0 * t * t);
    if (std::isfinite(v) && v > best) best = v;
  }
  return best;
}

TruncationParams truncation_build(const NonlinearitySpec& nl) {
  TruncationParams tp;
  double m = nl.superquadratic_exponent();
  tp.k = 2.0 * m / (m - 2.0);

  // f(t)/t - 1/k is increasing; bracket then bisect in log t
  auto slope_gap = [&](double t) { return nl.f(t) / t - 1.0 / tp.k; };
  double lo = 1e-12, hi = 1e6;
  if (!(slope_gap(lo) < 0.0) || !(slope_gap(hi) > 0.0))
    throw InvalidInput("truncation: no sign change in bracket, malformed nonlinearity");
  for (int i = 0; i < 200; ++i) {
    double mid = std::sqrt(lo * hi);
    (slope_gap(mid) < 0.0 ? lo : hi) = mid;
  }
  double a = 0.5 * (lo + hi);
  for (int i = 0; i < 8; ++i) { // Newton polish on f(a) - a/k
    double r = nl.f(a) - a / tp.k;
    double dr = nl.fprime(a) - 1.0 / tp.k;
    if (dr == 0.0) break;
    double step = r / dr;
    if (!std::isfinite(step)) break;
    a -= step;
  }
  tp.a = a;
  double target = tp.a / tp.k;
  if (!(std::fabs(nl.f(tp.a) - target) <= 1e-12 * target))
    throw InvalidInput("truncation: root polish failed to reach tolerance");
  return tp;
}

double h_eval(const NonlinearitySpec& nl, const TruncationParams& tp, double t) {
  return t <= tp.a ? nl.f(t) : t / tp.k;
}

double H_eval(const NonlinearitySpec& nl, const TruncationParams& tp, double t) {
  if (t <= tp.a) return nl.F(t);
  return nl.F(tp.a) + (t * t - tp.a * tp.a) / (2.0 * tp.k);
}

double g_eval(const NonlinearitySpec& nl, const TruncationParams& tp, bool in_tilde,
              double t) {
  return in_tilde ? nl.f(t) : h_eval(nl, tp, t);
}

double G_eval(const NonlinearitySpec& nl, const TruncationParams& tp, bool in_tilde,
              double t) {
  return in_tilde ? nl.F(t) : H_eval(nl, tp, t);
}

double gprime_eval(const NonlinearitySpec& nl, const TruncationParams& tp,
                   bool in_tilde, double t) {
  if (in_tilde) return nl.fprime(t);
  return t < tp.a ? nl.fprime(t) : 1.0 / tp.k;
}

double g_eval(std::size_t node, double t, const TruncationParams& tp,
              const RegionMask& omega_tilde, const NonlinearitySpec& nl) {
  return g_eval(nl, tp, omega_tilde.inside[node] != 0, t);
}

double G_eval(std::size_t node, double t, const TruncationParams& tp,
              const RegionMask& omega_tilde, const NonlinearitySpec& nl) {
  return G_eval(nl, tp, omega_tilde.inside[node] != 0, t);
}

} // namespace owell
