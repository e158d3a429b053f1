#pragma once

// Special functions used by variance moderation and the alpha-level
// decisions. Everything is templated on the floating-point type so the same
// code can be checked in long double.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace geneprofile::special {

namespace detail {

// Shift x upward with the recurrence until the asymptotic series is accurate.
template <typename T>
inline constexpr T kAsymptoticCutoff = T(6);

}  // namespace detail

/// Digamma function psi(x) for x > 0.
template <typename T>
T digamma(T x) {
  if (!(x > 0)) return std::numeric_limits<T>::quiet_NaN();
  T acc = 0;
  while (x < detail::kAsymptoticCutoff<T>) {
    acc -= T(1) / x;
    x += T(1);
  }
  const T r = T(1) / (x * x);
  // -sum B_2k / (2k x^2k)
  const T series =
      r * (T(1) / 12 -
           r * (T(1) / 120 -
                r * (T(1) / 252 -
                     r * (T(1) / 240 -
                          r * (T(1) / 132 - r * (T(691) / 32760 - r * (T(1) / 12)))))));
  return acc + std::log(x) - T(1) / (2 * x) - series;
}

/// Trigamma function psi'(x) for x > 0.
template <typename T>
T trigamma(T x) {
  if (!(x > 0)) return std::numeric_limits<T>::quiet_NaN();
  T acc = 0;
  while (x < detail::kAsymptoticCutoff<T>) {
    acc += T(1) / (x * x);
    x += T(1);
  }
  const T r = T(1) / (x * x);
  // sum B_2k / x^(2k+1)
  const T series =
      r * (T(1) / 6 -
           r * (T(1) / 30 -
                r * (T(1) / 42 -
                     r * (T(1) / 30 -
                          r * (T(5) / 66 - r * (T(691) / 2730 - r * (T(7) / 6)))))));
  return acc + T(1) / x + r / 2 + series / x;
}

/// Tetragamma function psi''(x) for x > 0.
template <typename T>
T tetragamma(T x) {
  if (!(x > 0)) return std::numeric_limits<T>::quiet_NaN();
  T acc = 0;
  while (x < detail::kAsymptoticCutoff<T>) {
    acc -= T(2) / (x * x * x);
    x += T(1);
  }
  const T r = T(1) / (x * x);
  // -sum (2k+1) B_2k / x^(2k+2)
  const T series =
      r * (T(1) / 2 -
           r * (T(1) / 6 -
                r * (T(1) / 6 -
                     r * (T(3) / 10 - r * (T(5) / 6 - r * (T(691) / 210))))));
  return acc - r - r / x - r * series;
}

/// Solves trigamma(y) = x for y > 0 by Newton iteration.
template <typename T>
T trigamma_inverse(T x) {
  if (!(x > 0)) throw std::domain_error("trigamma_inverse: argument must be positive");
  if (x > T(1e7)) return T(1) / std::sqrt(x);
  if (x < T(1e-6)) return T(1) / x;
  T y = T(0.5) + T(1) / x;
  for (int iter = 0; iter < 50; ++iter) {
    const T tri = trigamma(y);
    const T step = tri * (T(1) - tri / x) / tetragamma(y);
    y += step;
    if (-step / y < T(1e-8)) break;
  }
  return y;
}

/// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
template <typename T>
T incomplete_beta(T a, T b, T x) {
  if (!(a > 0) || !(b > 0)) return std::numeric_limits<T>::quiet_NaN();
  if (x <= 0) return T(0);
  if (x >= 1) return T(1);

  // The continued fraction converges fast for x < (a + 1) / (a + b + 2).
  if (x > (a + 1) / (a + b + 2)) return T(1) - incomplete_beta(b, a, T(1) - x);

  const T log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
  const T front = std::exp(log_front) / a;

  constexpr T tiny = std::numeric_limits<T>::min() * 16;
  constexpr T eps = std::numeric_limits<T>::epsilon();
  T f = 1, c = 1, d = 0;
  for (int i = 0; i <= 400; ++i) {
    const int m = i / 2;
    T numerator;
    if (i == 0) {
      numerator = 1;
    } else if (i % 2 == 0) {
      numerator = (m * (b - m) * x) / ((a + 2 * m - 1) * (a + 2 * m));
    } else {
      numerator = -((a + m) * (a + b + m) * x) / ((a + 2 * m) * (a + 2 * m + 1));
    }
    d = 1 + numerator * d;
    if (std::abs(d) < tiny) d = tiny;
    d = 1 / d;
    c = 1 + numerator / c;
    if (std::abs(c) < tiny) c = tiny;
    const T delta = c * d;
    f *= delta;
    if (std::abs(1 - delta) < eps) break;
  }
  return front * (f - 1);
}

template <typename T>
T normal_cdf(T z) {
  return T(0.5) * std::erfc(-z / std::sqrt(T(2)));
}

/// Upper tail P(T > t) of Student's t with `df` degrees of freedom. An
/// infinite `df` gives the standard normal tail.
template <typename T>
T student_t_upper_tail(T t, T df) {
  if (std::isinf(df)) return normal_cdf(-t);
  const T x = df / (df + t * t);
  const T half_tail = T(0.5) * incomplete_beta(df / 2, T(0.5), x);
  return t >= 0 ? half_tail : T(1) - half_tail;
}

template <typename T>
T student_t_cdf(T t, T df) {
  return T(1) - student_t_upper_tail(t, df);
}

/// The t* with P(T > t*) = alpha, found by bisection on the upper tail.
/// Requires 0 < alpha < 0.5, so t* > 0.
template <typename T>
T student_t_critical(T alpha, T df) {
  if (!(alpha > 0 && alpha < T(0.5))) {
    throw std::domain_error("student_t_critical: alpha must lie in (0, 0.5)");
  }
  if (!(df > 0)) throw std::domain_error("student_t_critical: df must be positive");
  T lo = 0, hi = 1;
  while (student_t_upper_tail(hi, df) > alpha) {
    lo = hi;
    hi *= 2;
    if (hi > T(1e12)) break;
  }
  for (int iter = 0; iter < 200; ++iter) {
    const T mid = (lo + hi) / 2;
    if (mid == lo || mid == hi) break;
    if (student_t_upper_tail(mid, df) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= T(1e-13) * hi) break;
  }
  return (lo + hi) / 2;
}

}  // namespace geneprofile::special
