#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "etas/model.hpp"
#include "etas/random.hpp"

namespace etas {

enum class PriorFamily { Gamma, LogNormal, Uniform };

/// Target distribution of one ETAS parameter.
///  Gamma:     a = shape,   b = rate
///  LogNormal: a = meanlog, b = sdlog
///  Uniform:   a = lower,   b = upper
struct PriorDistribution {
  PriorFamily family{PriorFamily::Uniform};
  double a{0.0};
  double b{1.0};

  [[nodiscard]] static PriorDistribution gamma(double shape, double rate) { return {PriorFamily::Gamma, shape, rate}; }
  [[nodiscard]] static PriorDistribution lognormal(double meanlog, double sdlog) {
    return {PriorFamily::LogNormal, meanlog, sdlog};
  }
  [[nodiscard]] static PriorDistribution uniform(double lower, double upper) {
    return {PriorFamily::Uniform, lower, upper};
  }

  void validate() const;
  [[nodiscard]] bool in_support_interior(double x) const noexcept;
  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double log_pdf(double x) const;
};

/// Priors for (mu, K, alpha, c, p). Defaults: mu ~ Gamma(0.5, 0.5),
/// K ~ LogNormal(-1, 0.5), alpha ~ U(0, 10), c ~ U(0, 1), p ~ U(1, 2).
struct PriorSpec {
  std::array<PriorDistribution, kNumParams> dists{
      PriorDistribution::gamma(0.5, 0.5), PriorDistribution::lognormal(-1.0, 0.5),
      PriorDistribution::uniform(0.0, 10.0), PriorDistribution::uniform(0.0, 1.0),
      PriorDistribution::uniform(1.0, 2.0)};

  [[nodiscard]] const PriorDistribution& operator[](std::size_t k) const { return dists[k]; }
  [[nodiscard]] PriorDistribution& operator[](std::size_t k) { return dists[k]; }

  /// Each distribution valid; supports non-negative; p lower bound >= 1.
  void validate() const;
  [[nodiscard]] bool contains(const EtasParams& params) const noexcept;
};

/// Internal (standard Gaussian a priori) parameters.
struct InternalParams {
  std::array<double, kNumParams> theta{};

  [[nodiscard]] double& operator[](std::size_t k) { return theta[k]; }
  [[nodiscard]] double operator[](std::size_t k) const { return theta[k]; }
  [[nodiscard]] bool finite() const noexcept;
};

/// Internal values are clamped to this magnitude before transformation.
inline constexpr double kThetaClamp = 38.0;

/// eta(theta) = F^-1(Phi(theta)); strictly increasing onto the support.
[[nodiscard]] double forward(double theta, const PriorDistribution& target);
/// theta = Phi^-1(F(x)); throws DomainError outside the support interior.
[[nodiscard]] double inverse(double x, const PriorDistribution& target);
/// d eta / d theta = phi(theta) / f(eta(theta)).
[[nodiscard]] double forward_derivative(double theta, const PriorDistribution& target);

/// Everything the chain rule needs about one link evaluation.
struct LinkValue {
  double value{0.0};       // eta
  double log_value{0.0};   // log eta, computed without forming eta where possible
  double derivative{0.0};  // d eta / d theta
  double dlog{0.0};        // d log eta / d theta
};

[[nodiscard]] LinkValue evaluate_link(double theta, const PriorDistribution& target);

struct LinkedParams {
  EtasParams etas;
  std::array<LinkValue, kNumParams> links{};
};

[[nodiscard]] LinkedParams link(const InternalParams& theta, const PriorSpec& priors);
[[nodiscard]] EtasParams to_etas(const InternalParams& theta, const PriorSpec& priors);
[[nodiscard]] InternalParams to_internal(const EtasParams& params, const PriorSpec& priors);

/// Standard 5-dimensional Gaussian log density (normalized).
[[nodiscard]] double log_prior(const InternalParams& theta) noexcept;

[[nodiscard]] std::vector<EtasParams> sample_prior(const PriorSpec& priors, std::size_t n, Rng& rng);

/// Rate-prior helper: an upper bound on mu is n_events / duration; taking
/// half of it as the prior mean with the given shape fixes the rate.
[[nodiscard]] PriorDistribution suggest_mu_prior(std::size_t n_events, double duration, double shape = 0.5);

}  // namespace etas
