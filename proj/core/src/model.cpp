#include "etas/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "etas/errors.hpp"

namespace etas {

void EtasParams::validate() const {
  for (const double v : to_array()) {
    if (!std::isfinite(v)) throw DomainError("ETAS parameters must be finite");
  }
  if (mu < 0.0 || K < 0.0 || alpha < 0.0 || c < 0.0) {
    throw DomainError("ETAS parameters mu, K, alpha, c must be non-negative");
  }
  if (!(p > 1.0)) throw DomainError("ETAS parameter p must exceed 1");
}

double triggering_kernel(double t, const Event& parent, const EtasParams& params, double m0) {
  if (!(t > parent.time)) return 0.0;
  const double log_power = -params.p * std::log1p((t - parent.time) / params.c);
  return params.K * std::exp(params.alpha * (parent.magnitude - m0) + log_power);
}

double omori_integral(double from_offset, double to_offset, double c, double p) {
  if (!(p > 1.0)) throw DomainError("closed-form Omori integral requires p > 1");
  if (!(to_offset > from_offset)) return 0.0;
  const double scale = c / (p - 1.0);
  const double head = std::exp((1.0 - p) * std::log1p(from_offset / c));
  if (std::isinf(to_offset)) return scale * head;
  const double log_ratio = std::log1p((to_offset - from_offset) / (c + from_offset));
  return scale * head * -std::expm1((1.0 - p) * log_ratio);
}

double conditional_intensity(double t, std::span<const Event> history, const EtasParams& params, double m0) {
  double rate = params.mu;
  for (const auto& h : history) {
    if (!(h.time < t)) throw DomainError("conditional_intensity: history event does not precede t");
    rate += triggering_kernel(t, h, params, m0);
  }
  return rate;
}

double triggered_count(const Event& parent, const TimeDomain& domain, const EtasParams& params) {
  if (parent.time >= domain.t2) return 0.0;
  const double start = std::max(parent.time, domain.t1);
  const double productivity = params.K * std::exp(params.alpha * (parent.magnitude - domain.m0));
  return productivity * omori_integral(start - parent.time, domain.t2 - parent.time, params.c, params.p);
}

double integrated_intensity(const TimeDomain& domain, const Catalog& modeled, const Catalog& history,
                            const EtasParams& params) {
  domain.validate();
  if (!(params.p > 1.0)) throw DomainError("integrated_intensity requires p > 1");
  double total = domain.length() * params.mu;
  for (const auto& e : history) total += triggered_count(e, domain, params);
  for (const auto& e : modeled) total += triggered_count(e, domain, params);
  return total;
}

double exact_log_likelihood(const TimeDomain& domain, const Catalog& modeled, const Catalog& history,
                            const EtasParams& params) {
  double log_sum = 0.0;
  const auto hist = history.events();
  const auto mod = modeled.events();
  for (std::size_t i = 0; i < mod.size(); ++i) {
    const double t = mod[i].time;
    double rate = params.mu;
    for (const auto& h : hist) {
      if (h.time < t) rate += triggering_kernel(t, h, params, domain.m0);
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (mod[j].time < t) rate += triggering_kernel(t, mod[j], params, domain.m0);
    }
    if (!(rate > 0.0)) {
      throw NumericError("zero conditional intensity at observed event " + std::to_string(mod[i].id));
    }
    log_sum += std::log(rate);
  }
  return log_sum - integrated_intensity(domain, modeled, history, params);
}

double gr_log_density(double m, const MagnitudeModel& model) {
  if (!(m > model.m0)) throw DomainError("gr_log_density: magnitude must exceed M0");
  const double beta = model.b_value * std::numbers::ln10;
  return std::log(beta) - beta * (m - model.m0);
}

double gr_magnitude_from_uniform(double u, const MagnitudeModel& model) {
  return model.m0 - std::log10(u) / model.b_value;
}

std::vector<double> gr_sample(std::size_t n, const MagnitudeModel& model, Rng& rng) {
  std::vector<double> out(n);
  for (auto& m : out) m = gr_magnitude_from_uniform(open_unit(rng), model);
  return out;
}

}  // namespace etas
