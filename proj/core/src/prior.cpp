#include "etas/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "etas/errors.hpp"
#include "etas/special_functions.hpp"

namespace etas {

namespace sp = special;

void PriorDistribution::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("prior parameters must be finite");
  switch (family) {
    case PriorFamily::Gamma:
      if (!(a > 0.0 && b > 0.0)) throw DomainError("gamma prior requires shape > 0 and rate > 0");
      break;
    case PriorFamily::LogNormal:
      if (!(b > 0.0)) throw DomainError("lognormal prior requires sdlog > 0");
      break;
    case PriorFamily::Uniform:
      if (!(a < b)) throw DomainError("uniform prior requires lower < upper");
      break;
  }
}

bool PriorDistribution::in_support_interior(double x) const noexcept {
  if (!std::isfinite(x)) return false;
  switch (family) {
    case PriorFamily::Gamma:
    case PriorFamily::LogNormal:
      return x > 0.0;
    case PriorFamily::Uniform:
      return x > a && x < b;
  }
  return false;
}

double PriorDistribution::cdf(double x) const {
  switch (family) {
    case PriorFamily::Gamma:
      return x <= 0.0 ? 0.0 : sp::gamma_p(a, b * x);
    case PriorFamily::LogNormal:
      return x <= 0.0 ? 0.0 : sp::normal_cdf((std::log(x) - a) / b);
    case PriorFamily::Uniform:
      return std::clamp((x - a) / (b - a), 0.0, 1.0);
  }
  return 0.0;
}

double PriorDistribution::log_pdf(double x) const {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  switch (family) {
    case PriorFamily::Gamma:
      if (x <= 0.0) return neg_inf;
      return a * std::log(b) + (a - 1.0) * std::log(x) - b * x - std::lgamma(a);
    case PriorFamily::LogNormal: {
      if (x <= 0.0) return neg_inf;
      const double z = (std::log(x) - a) / b;
      return sp::normal_log_pdf(z) - std::log(b) - std::log(x);
    }
    case PriorFamily::Uniform:
      return (x < a || x > b) ? neg_inf : -std::log(b - a);
  }
  return neg_inf;
}

void PriorSpec::validate() const {
  for (const auto& d : dists) d.validate();
  for (std::size_t k = 0; k < kNumParams; ++k) {
    if (dists[k].family == PriorFamily::Uniform && dists[k].a < 0.0) {
      throw DomainError("prior for " + std::string(kParamNames[k]) + " must have non-negative support");
    }
  }
  if (dists[kP].family != PriorFamily::Uniform) throw DomainError("prior for p must be uniform on [a_p, b_p]");
  if (dists[kP].a < 1.0) throw DomainError("prior for p requires lower bound >= 1");
}

bool PriorSpec::contains(const EtasParams& params) const noexcept {
  const auto v = params.to_array();
  for (std::size_t k = 0; k < kNumParams; ++k) {
    if (!dists[k].in_support_interior(v[k])) return false;
  }
  return true;
}

bool InternalParams::finite() const noexcept {
  return std::all_of(theta.begin(), theta.end(), [](double v) { return std::isfinite(v); });
}

LinkValue evaluate_link(double theta, const PriorDistribution& target) {
  if (std::isnan(theta)) throw DomainError("link: internal value is NaN");
  const double t = std::clamp(theta, -kThetaClamp, kThetaClamp);
  LinkValue out;
  switch (target.family) {
    case PriorFamily::Gamma: {
      const double shape = target.a;
      const double rate = target.b;
      // Solve in the tail whose probability is small so both ends keep
      // relative accuracy.
      const double log_x = t <= 0.0 ? sp::log_gamma_quantile(shape, sp::normal_log_cdf(t), false)
                                    : sp::log_gamma_quantile(shape, sp::normal_log_cdf(-t), true);
      out.log_value = log_x - std::log(rate);
      out.value = std::exp(out.log_value);
      const double log_density = shape * std::log(rate) + (shape - 1.0) * out.log_value - rate * out.value -
                                 std::lgamma(shape);
      const double log_deriv = sp::normal_log_pdf(t) - log_density;
      out.derivative = std::exp(log_deriv);
      out.dlog = std::exp(log_deriv - out.log_value);
      break;
    }
    case PriorFamily::LogNormal:
      out.log_value = target.a + target.b * t;
      out.value = std::exp(out.log_value);
      out.derivative = out.value * target.b;
      out.dlog = target.b;
      break;
    case PriorFamily::Uniform: {
      const double width = target.b - target.a;
      out.value = target.a + width * sp::normal_cdf(t);
      out.derivative = width * sp::normal_pdf(t);
      if (target.a == 0.0) {
        out.log_value = std::log(width) + sp::normal_log_cdf(t);
        out.dlog = std::exp(sp::normal_log_pdf(t) - sp::normal_log_cdf(t));
      } else {
        out.log_value = std::log(out.value);
        out.dlog = out.derivative / out.value;
      }
      break;
    }
  }
  return out;
}

double forward(double theta, const PriorDistribution& target) { return evaluate_link(theta, target).value; }

double forward_derivative(double theta, const PriorDistribution& target) {
  return evaluate_link(theta, target).derivative;
}

double inverse(double x, const PriorDistribution& target) {
  if (!target.in_support_interior(x)) throw DomainError("inverse link: value outside the prior support");
  switch (target.family) {
    case PriorFamily::Gamma: {
      const double log_p = sp::log_gamma_p(target.a, target.b * x);
      if (log_p < -std::numbers::ln2) return sp::normal_quantile(std::exp(log_p));
      return -sp::normal_quantile(std::exp(sp::log_gamma_q(target.a, target.b * x)));
    }
    case PriorFamily::LogNormal:
      return (std::log(x) - target.a) / target.b;
    case PriorFamily::Uniform: {
      const double u = (x - target.a) / (target.b - target.a);
      if (u > 0.5) return -sp::normal_quantile((target.b - x) / (target.b - target.a));
      return sp::normal_quantile(u);
    }
  }
  return 0.0;
}

LinkedParams link(const InternalParams& theta, const PriorSpec& priors) {
  LinkedParams out;
  std::array<double, kNumParams> values{};
  for (std::size_t k = 0; k < kNumParams; ++k) {
    out.links[k] = evaluate_link(theta[k], priors[k]);
    values[k] = out.links[k].value;
  }
  out.etas = EtasParams::from_array(values);
  return out;
}

EtasParams to_etas(const InternalParams& theta, const PriorSpec& priors) { return link(theta, priors).etas; }

InternalParams to_internal(const EtasParams& params, const PriorSpec& priors) {
  InternalParams out;
  const auto v = params.to_array();
  for (std::size_t k = 0; k < kNumParams; ++k) out[k] = inverse(v[k], priors[k]);
  return out;
}

double log_prior(const InternalParams& theta) noexcept {
  double total = 0.0;
  for (const double t : theta.theta) total += sp::normal_log_pdf(t);
  return total;
}

std::vector<EtasParams> sample_prior(const PriorSpec& priors, std::size_t n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<EtasParams> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    InternalParams theta;
    for (auto& t : theta.theta) t = gauss(rng);
    out.push_back(to_etas(theta, priors));
  }
  return out;
}

PriorDistribution suggest_mu_prior(std::size_t n_events, double duration, double shape) {
  if (!(duration > 0.0) || n_events == 0) throw DomainError("suggest_mu_prior needs events and a positive duration");
  const double upper_rate = static_cast<double>(n_events) / duration;
  const double mean = 0.5 * upper_rate;
  return PriorDistribution::gamma(shape, shape / mean);
}

}  // namespace etas
