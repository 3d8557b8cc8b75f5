#include "etas/special_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "etas/errors.hpp"

namespace etas::special {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
constexpr double kInf = std::numeric_limits<double>::infinity();

// Power series for P(a, x); returns log P. `x` may have underflowed to 0
// while log_x stays finite.
double log_p_series(double a, double x, double log_x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return a * log_x - x - std::lgamma(a) + std::log(sum);
}

// Modified Lentz continued fraction for Q(a, x); returns log Q.
double log_q_fraction(double a, double x, double log_x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return -x + a * log_x - std::lgamma(a) + std::log(h);
}

double log_p_from_log_x(double a, double log_x) {
  if (log_x == -kInf) return -kInf;
  const double x = std::exp(log_x);
  if (x == kInf) return 0.0;
  if (x < a + 1.0) return log_p_series(a, x, log_x);
  return std::log1p(-std::exp(log_q_fraction(a, x, log_x)));
}

double log_q_from_log_x(double a, double log_x) {
  if (log_x == -kInf) return 0.0;
  const double x = std::exp(log_x);
  if (x == kInf) return -kInf;
  if (x < a + 1.0) return std::log1p(-std::exp(log_p_series(a, x, log_x)));
  return log_q_fraction(a, x, log_x);
}

}  // namespace

double normal_pdf(double x) noexcept { return std::exp(normal_log_pdf(x)); }

double normal_log_pdf(double x) noexcept { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_log_cdf(double x) noexcept {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / kSqrt2));
  if (x > -20.0) return std::log(0.5 * std::erfc(-x / kSqrt2));
  const double r = 1.0 / (x * x);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    if (prob == 0.0) return -kInf;
    if (prob == 1.0) return kInf;
    throw DomainError("normal_quantile: probability outside [0, 1]");
  }
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                           1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                           6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                           -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                           3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (prob < p_low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - p_low) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement; the tails are refined against the matching tail
  // probability so the residual keeps relative precision.
  if (prob < 0.5) {
    const double e = 0.5 * std::erfc(-x / kSqrt2) - prob;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  } else {
    const double e = 0.5 * std::erfc(x / kSqrt2) - (1.0 - prob);
    const double u = -e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double gamma_p(double a, double x) { return x <= 0.0 ? 0.0 : std::exp(log_gamma_p(a, x)); }

double gamma_q(double a, double x) { return x <= 0.0 ? 1.0 : std::exp(log_gamma_q(a, x)); }

double log_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("incomplete gamma requires a > 0");
  if (x <= 0.0) return -kInf;
  return log_p_from_log_x(a, std::log(x));
}

double log_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw DomainError("incomplete gamma requires a > 0");
  if (x <= 0.0) return 0.0;
  return log_q_from_log_x(a, std::log(x));
}

double log_gamma_quantile(double a, double log_prob, bool upper) {
  if (!(a > 0.0)) throw DomainError("gamma quantile requires a > 0");
  if (!(log_prob <= 0.0)) throw DomainError("gamma quantile: log probability must be <= 0");
  if (log_prob == 0.0) return upper ? -kInf : kInf;
  if (log_prob == -kInf) return upper ? kInf : -kInf;

  // Residual increasing in y = log x.
  auto residual = [&](double y) {
    return upper ? log_prob - log_q_from_log_x(a, y) : log_p_from_log_x(a, y) - log_prob;
  };
  // d residual / dy = x f(x) / P (or / Q), f the unit-rate gamma density.
  auto slope = [&](double y) {
    const double log_xf = a * y - std::exp(y) - std::lgamma(a);
    const double log_tail = upper ? log_q_from_log_x(a, y) : log_p_from_log_x(a, y);
    return std::exp(log_xf - log_tail);
  };

  // Starting point: Wilson-Hilferty, or the small-x asymptote
  // P ~ x^a / Gamma(a + 1) when it is unusable.
  double y;
  const double prob = std::exp(log_prob);
  double z = 0.0;
  bool have_z = prob > 1e-300;
  if (have_z) z = upper ? -normal_quantile(prob) : normal_quantile(prob);
  const double wh = have_z ? a * std::pow(1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a)), 3) : -1.0;
  if (wh > 0.0 && std::isfinite(wh)) {
    y = std::log(wh);
  } else if (!upper) {
    y = (log_prob + std::lgamma(a + 1.0)) / a;
  } else {
    y = std::log(std::max(-log_prob, 1e-3));
  }

  // Bracket the root.
  double lo = y;
  double hi = y;
  double f_lo = residual(lo);
  double f_hi = f_lo;
  double step = 1.0;
  while (f_lo > 0.0) {
    hi = lo;
    f_hi = f_lo;
    lo -= step;
    step *= 2.0;
    f_lo = residual(lo);
  }
  step = 1.0;
  while (f_hi < 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi += step;
    step *= 2.0;
    f_hi = residual(hi);
  }
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;

  y = std::clamp(y, lo, hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = residual(y);
    if (f == 0.0) return y;
    if (f < 0.0) lo = y; else hi = y;
    const double g = slope(y);
    double next = y - f / g;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 1e-15 * std::max(1.0, std::abs(y))) return next;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(y))) return next;
    y = next;
  }
  return y;
}

}  // namespace etas::special
