#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "etas/catalog.hpp"
#include "etas/random.hpp"

namespace etas {

/// Index of each ETAS parameter in 5-vectors (internal values, gradients,
/// covariance rows).
enum Param : std::size_t { kMu = 0, kK = 1, kAlpha = 2, kC = 3, kP = 4 };
inline constexpr std::size_t kNumParams = 5;
inline constexpr std::array<std::string_view, kNumParams> kParamNames{"mu", "K", "alpha", "c", "p"};

/// Temporal ETAS parameters on the natural scale.
struct EtasParams {
  double mu{0.1};      // background rate, events/day
  double K{0.089};     // productivity
  double alpha{2.29};  // magnitude scaling
  double c{0.11};      // Omori offset, days
  double p{1.08};      // Omori exponent

  /// Throws DomainError unless mu, K, alpha, c >= 0 and p > 1.
  void validate() const;

  [[nodiscard]] std::array<double, kNumParams> to_array() const noexcept { return {mu, K, alpha, c, p}; }
  [[nodiscard]] static EtasParams from_array(const std::array<double, kNumParams>& v) noexcept {
    return {v[kMu], v[kK], v[kAlpha], v[kC], v[kP]};
  }
};

/// Gutenberg-Richter magnitude law truncated below at m0.
struct MagnitudeModel {
  double b_value{1.0};
  double m0{2.5};
};

/// g(t) = K exp(alpha (m_i - M0)) ((t - t_i)/c + 1)^-p for t > t_i, else 0.
[[nodiscard]] double triggering_kernel(double t, const Event& parent, const EtasParams& params, double m0);

/// Integral of ((x/c) + 1)^-p over [from_offset, to_offset], offsets measured
/// from the parent time. Evaluated with log1p/expm1 so narrow or distant
/// intervals keep full relative precision. to_offset may be +inf.
[[nodiscard]] double omori_integral(double from_offset, double to_offset, double c, double p);

/// lambda(t | H) = mu + sum over history of the triggering kernel.
/// Every history event must precede t strictly; throws DomainError otherwise.
[[nodiscard]] double conditional_intensity(double t, std::span<const Event> history, const EtasParams& params,
                                           double m0);

/// Expected number of parent-triggered events in [T1, T2] (one Lambda_i term).
[[nodiscard]] double triggered_count(const Event& parent, const TimeDomain& domain, const EtasParams& params);

/// Lambda(T1, T2): background plus the closed-form triggered counts of
/// every history and modeled event. Throws DomainError if p <= 1.
[[nodiscard]] double integrated_intensity(const TimeDomain& domain, const Catalog& modeled, const Catalog& history,
                                          const EtasParams& params);

/// Hawkes log-likelihood -Lambda(T1,T2) + sum log lambda(t_i | H_{t_i}).
/// History events condition the intensity but add no log-intensity term.
/// Throws NumericError when an observed event has zero intensity.
[[nodiscard]] double exact_log_likelihood(const TimeDomain& domain, const Catalog& modeled, const Catalog& history,
                                          const EtasParams& params);

/// log(b ln10) - b ln10 (m - M0); throws DomainError for m <= M0.
[[nodiscard]] double gr_log_density(double m, const MagnitudeModel& model);

/// Transform of one uniform draw u in (0, 1): m = M0 - log10(u) / b,
/// so u is the exceedance probability of m.
[[nodiscard]] double gr_magnitude_from_uniform(double u, const MagnitudeModel& model);

[[nodiscard]] std::vector<double> gr_sample(std::size_t n, const MagnitudeModel& model, Rng& rng);

}  // namespace etas
