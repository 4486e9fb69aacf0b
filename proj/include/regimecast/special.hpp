#pragma once

#include <cmath>
#include <limits>

#include "regimecast/error.hpp"

namespace regimecast::special {

namespace detail {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  fail(ErrorKind::convergence, "incomplete beta continued fraction did not converge");
}

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace detail

/// Regularised incomplete beta I_x(a, b). Takes x and 1 - x separately so callers that know
/// the complement exactly (t and F tails) avoid cancellation.
inline double ibeta(double a, double b, double x, double one_minus_x) {
  if (!(a > 0.0) || !(b > 0.0)) fail(ErrorKind::domain, "ibeta: a and b must be positive");
  if (!(x >= 0.0) || !(x <= 1.0)) fail(ErrorKind::domain, "ibeta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (one_minus_x == 0.0) return 1.0;
  const double front =
      std::exp(a * std::log(x) + b * std::log(one_minus_x) - detail::log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, one_minus_x) / b;
}

/// Complement 1 - I_x(a, b) without cancellation when I_x is close to 1.
inline double ibetac(double a, double b, double x, double one_minus_x) {
  return ibeta(b, a, one_minus_x, x);
}

inline double ibeta(double a, double b, double x) { return ibeta(a, b, x, 1.0 - x); }

/// Upper tail P(T > t) of Student's t with df degrees of freedom.
inline double student_t_upper(double t, double df) {
  if (!(df > 0.0)) fail(ErrorKind::domain, "student_t_upper: df must be positive");
  if (std::isnan(t)) fail(ErrorKind::domain, "student_t_upper: NaN statistic");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double t2 = t * t;
  const double denom = df + t2;
  const double tail = 0.5 * ibeta(0.5 * df, 0.5, df / denom, t2 / denom);  // P(|T| > |t|) / 2
  return t >= 0.0 ? tail : 1.0 - tail;
}

inline double student_t_cdf(double t, double df) { return student_t_upper(-t, df); }

/// Upper tail P(F > f) of the F distribution with (d1, d2) degrees of freedom.
inline double f_upper(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) fail(ErrorKind::domain, "f_upper: degrees of freedom must be positive");
  if (std::isnan(f)) fail(ErrorKind::domain, "f_upper: NaN statistic");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double denom = d2 + d1 * f;
  return ibeta(0.5 * d2, 0.5 * d1, d2 / denom, d1 * f / denom);
}

}  // namespace regimecast::special
