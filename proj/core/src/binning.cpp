#include "etas/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "etas/errors.hpp"

namespace etas {

void BinningConfig::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("binning: delta must be positive");
  if (!(coef > 0.0) || !std::isfinite(coef)) throw DomainError("binning: coef must be positive");
  if (n_max < 0) throw DomainError("binning: n_max must be non-negative");
}

std::vector<double> ladder_offsets(const BinningConfig& cfg) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(cfg.n_max) + 2);
  out.push_back(0.0);
  for (int n = 0; n <= cfg.n_max; ++n) out.push_back(cfg.delta * std::pow(1.0 + cfg.coef, n));
  return out;
}

std::vector<TimeBin> make_bins(const Event& parent, const TimeDomain& domain, const BinningConfig& cfg) {
  cfg.validate();
  if (!(parent.time < domain.t2)) throw DomainError("make_bins: parent must precede T2");

  struct Boundary {
    double t;
    int rung;  // ladder position, or -1 for T1/T2
  };
  std::vector<Boundary> bounds;
  const auto offsets = ladder_offsets(cfg);
  const bool history_parent = parent.time < domain.t1;
  if (history_parent) bounds.push_back({domain.t1, -1});
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const double t = parent.time + offsets[k];
    if (!(t < domain.t2)) break;
    if (history_parent && !(t > domain.t1)) continue;
    bounds.push_back({t, static_cast<int>(k)});
  }
  bounds.push_back({domain.t2, -1});

  // Merge degenerate bins into their successor; T2 always survives.
  std::vector<Boundary> kept;
  kept.reserve(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const auto& b = bounds[i];
    if (!kept.empty() && b.t - kept.back().t <= 1e-12 * std::max(1.0, std::abs(kept.back().t))) {
      if (i + 1 < bounds.size()) continue;
      if (kept.size() > 1) kept.pop_back();
    }
    kept.push_back(b);
  }

  std::vector<TimeBin> bins;
  bins.reserve(kept.size() - 1);
  for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
    const bool full_rung = kept[i].rung >= 0 && kept[i + 1].rung == kept[i].rung + 1;
    bins.push_back({kept[i].t, kept[i + 1].t, parent.id, full_rung ? kept[i].rung : kPartialBin});
  }
  return bins;
}

OmoriLogIntegral omori_log_integral(double a, double b, double c, double p) {
  const double pm1 = p - 1.0;
  const double log_ratio = std::log1p((b - a) / (c + a));
  const double tail = std::exp(-pm1 * log_ratio);  // (u_b / u_a)^(1-p)
  const double bracket = -std::expm1(-pm1 * log_ratio);
  if (!(bracket > 0.0)) throw NumericError("omori_log_integral: bin integral underflows");
  const double log_head = std::log1p(a / c);

  OmoriLogIntegral out;
  out.value = std::log(c) - std::log(pm1) - pm1 * log_head + std::log(bracket);
  const double c_dratio = -c * (b - a) / ((c + a) * (c + b));  // c * d log_ratio / d c
  out.c_dlog_c = 1.0 + pm1 * a / (c + a) + pm1 * tail * c_dratio / bracket;
  out.d_p = -1.0 / pm1 - log_head + log_ratio * tail / bracket;
  return out;
}

ComponentValue background_component(double duration, const LinkedParams& lp) {
  ComponentValue out;
  out.value = std::log(duration) + lp.links[kMu].log_value;
  out.gradient[kMu] = lp.links[kMu].dlog;
  return out;
}

ComponentValue bin_component(double magnitude_excess, const OmoriLogIntegral& omori, const LinkedParams& lp) {
  ComponentValue out;
  out.value = lp.links[kK].log_value + lp.etas.alpha * magnitude_excess + omori.value;
  out.gradient[kK] = lp.links[kK].dlog;
  out.gradient[kAlpha] = magnitude_excess * lp.links[kAlpha].derivative;
  out.gradient[kC] = omori.c_dlog_c * lp.links[kC].dlog;
  out.gradient[kP] = omori.d_p * lp.links[kP].derivative;
  return out;
}

ComponentValue event_component(double t, std::span<const Event> history, double m0, const LinkedParams& lp) {
  const auto& q = lp.etas;
  const double log_mu = lp.links[kMu].log_value;
  const double log_k = lp.links[kK].log_value;

  // Two passes: find the largest log term, then accumulate scaled sums.
  double max_log = log_mu;
  for (const auto& h : history) {
    if (!(h.time < t)) throw DomainError("event_component: history must precede the event");
    const double lt = log_k + q.alpha * (h.magnitude - m0) - q.p * std::log1p((t - h.time) / q.c);
    max_log = std::max(max_log, lt);
  }
  const double w_mu = std::exp(log_mu - max_log);
  double sum = w_mu;
  double s_alpha = 0.0;
  double s_c = 0.0;
  double s_p = 0.0;
  double s_k = 0.0;
  for (const auto& h : history) {
    const double d = t - h.time;
    const double log_x = std::log1p(d / q.c);
    const double w = std::exp(log_k + q.alpha * (h.magnitude - m0) - q.p * log_x - max_log);
    sum += w;
    s_k += w;
    s_alpha += w * (h.magnitude - m0);
    s_c += w * q.p * d / (q.c + d);  // c * d/dc of the log kernel
    s_p -= w * log_x;
  }

  ComponentValue out;
  out.value = max_log + std::log(sum);
  out.gradient[kMu] = (w_mu / sum) * lp.links[kMu].dlog;
  out.gradient[kK] = (s_k / sum) * lp.links[kK].dlog;
  out.gradient[kAlpha] = (s_alpha / sum) * lp.links[kAlpha].derivative;
  out.gradient[kC] = (s_c / sum) * lp.links[kC].dlog;
  out.gradient[kP] = (s_p / sum) * lp.links[kP].derivative;
  return out;
}

double log_Lambda0(const TimeDomain& domain, const InternalParams& theta, const PriorSpec& priors) {
  domain.validate();
  return background_component(domain.length(), link(theta, priors)).value;
}

double log_Lambda_i(const TimeBin& bin, const Event& parent, double m0, const InternalParams& theta,
                    const PriorSpec& priors) {
  return evaluate_component(BinContext{bin, parent, m0}, theta, priors).value;
}

double log_lambda_point(const Event& event, std::span<const Event> history_before, double m0,
                        const InternalParams& theta, const PriorSpec& priors) {
  return event_component(event.time, history_before, m0, link(theta, priors)).value;
}

ComponentValue evaluate_component(const ComponentContext& ctx, const InternalParams& theta,
                                  const PriorSpec& priors) {
  const auto lp = link(theta, priors);
  return std::visit(
      [&](const auto& c) -> ComponentValue {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, BackgroundContext>) {
          c.domain.validate();
          return background_component(c.domain.length(), lp);
        } else if constexpr (std::is_same_v<T, BinContext>) {
          if (!(c.bin.hi > c.bin.lo) || c.bin.lo < c.parent.time) {
            throw DomainError("bin must be non-empty and start at or after its parent");
          }
          const auto omori =
              omori_log_integral(c.bin.lo - c.parent.time, c.bin.hi - c.parent.time, lp.etas.c, lp.etas.p);
          return bin_component(c.parent.magnitude - c.m0, omori, lp);
        } else {
          return event_component(c.event.time, c.history, c.m0, lp);
        }
      },
      ctx);
}

Gradient gradient(const ComponentContext& ctx, const InternalParams& theta, const PriorSpec& priors) {
  return evaluate_component(ctx, theta, priors).gradient;
}

}  // namespace etas
