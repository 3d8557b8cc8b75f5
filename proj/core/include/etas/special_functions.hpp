#pragma once

namespace etas::special {

/// Standard normal density, CDF and their logarithms.
[[nodiscard]] double normal_pdf(double x) noexcept;
[[nodiscard]] double normal_log_pdf(double x) noexcept;
[[nodiscard]] double normal_cdf(double x) noexcept;
/// log Phi(x), accurate deep into the lower tail (asymptotic series below -20).
[[nodiscard]] double normal_log_cdf(double x) noexcept;

/// Phi^-1(prob) for prob in (0, 1): Acklam's rational start refined by one
/// Halley step against erfc, giving close to full double precision.
[[nodiscard]] double normal_quantile(double prob);

/// Regularized lower/upper incomplete gamma P(a, x), Q(a, x) and their logs
/// (series for x < a + 1, Lentz continued fraction otherwise).
[[nodiscard]] double gamma_p(double a, double x);
[[nodiscard]] double gamma_q(double a, double x);
[[nodiscard]] double log_gamma_p(double a, double x);
[[nodiscard]] double log_gamma_q(double a, double x);

/// Quantile of the unit-rate Gamma(a) distribution. If `upper` is set the
/// argument is the upper-tail probability Q. Newton in log x, seeded by
/// Wilson-Hilferty (or the small-x asymptote), safeguarded by bisection.
/// `log_prob` is the natural log of the target probability so tails far
/// below DBL_MIN remain representable. Returns log x.
[[nodiscard]] double log_gamma_quantile(double a, double log_prob, bool upper);

}  // namespace etas::special
