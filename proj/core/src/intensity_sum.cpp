#include "etas/intensity_sum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/digamma.hpp>

#include "etas/errors.hpp"

namespace etas {

namespace {

constexpr double kNodeStep = 0.2;
constexpr double kNodeTolerance = 1e-15;
constexpr double kNodeUpper = 4.1;  // ~log 60; exp(3y - e^y) is negligible beyond

struct Nodes {
  std::vector<double> decay_rate;  // e^y / c
  std::vector<double> w0;          // kernel x^-p
  std::vector<double> wc;          // p (x^-p - x^-(p+1)), i.e. c d/dc of the kernel
  std::vector<double> wp;          // d/dp of the kernel
};

Nodes make_nodes(double c, double p, double max_lag, bool with_gradient) {
  const double log_xmax = std::log1p(max_lag / c);
  const double y0 = std::log(kNodeTolerance * p * std::tgamma(p)) / p - log_xmax - 1.0;
  const auto count = static_cast<std::size_t>(std::ceil((kNodeUpper - y0) / kNodeStep)) + 1;
  const double log_scale = std::log(kNodeStep) - std::lgamma(p);
  const double psi = with_gradient ? boost::math::digamma(p) : 0.0;

  Nodes n;
  n.decay_rate.resize(count);
  n.w0.resize(count);
  if (with_gradient) {
    n.wc.resize(count);
    n.wp.resize(count);
  }
  for (std::size_t j = 0; j < count; ++j) {
    const double y = y0 + kNodeStep * static_cast<double>(j);
    const double ey = std::exp(y);
    n.decay_rate[j] = ey / c;
    n.w0[j] = std::exp(log_scale + p * y - ey);
    if (with_gradient) {
      n.wc[j] = n.w0[j] * (p - ey);
      n.wp[j] = n.w0[j] * (y - psi);
    }
  }
  return n;
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace

EventIntensitySum::EventIntensitySum(std::vector<Event> events, std::vector<std::size_t> targets, double m0,
                                     IntensityStrategy strategy)
    : events_(std::move(events)), targets_(std::move(targets)), m0_(m0) {
  if (!std::is_sorted(events_.begin(), events_.end(), event_order)) {
    throw DomainError("EventIntensitySum: events must be sorted");
  }
  if (!std::is_sorted(targets_.begin(), targets_.end()) ||
      std::adjacent_find(targets_.begin(), targets_.end()) != targets_.end()) {
    throw DomainError("EventIntensitySum: targets must be strictly increasing");
  }
  if (!targets_.empty() && targets_.back() >= events_.size()) {
    throw DomainError("EventIntensitySum: target index out of range");
  }
  is_target_.assign(events_.size(), 0);
  prefix_.reserve(targets_.size());
  for (const auto i : targets_) {
    is_target_[i] = 1;
    const auto it = std::lower_bound(events_.begin(), events_.end(), events_[i].time,
                                     [](const Event& e, double t) { return e.time < t; });
    prefix_.push_back(static_cast<std::size_t>(it - events_.begin()));
  }
  max_magnitude_ = m0_;
  for (const auto& e : events_) max_magnitude_ = std::max(max_magnitude_, e.magnitude);

  if (strategy == IntensityStrategy::Auto) {
    strategy = events_.size() > kExponentialSumThreshold ? IntensityStrategy::ExponentialSum
                                                          : IntensityStrategy::Direct;
  }
  strategy_ = strategy;
}

void EventIntensitySum::evaluate(const LinkedParams& lp, std::span<ComponentValue> out) const {
  if (out.size() != targets_.size()) throw DomainError("EventIntensitySum: output size mismatch");
  if (strategy_ == IntensityStrategy::Direct) {
    evaluate_direct(lp, out, true);
  } else {
    evaluate_exponential(lp, out, true);
  }
}

void EventIntensitySum::evaluate_values(const LinkedParams& lp, std::span<double> out) const {
  if (out.size() != targets_.size()) throw DomainError("EventIntensitySum: output size mismatch");
  std::vector<ComponentValue> tmp(targets_.size());
  if (strategy_ == IntensityStrategy::Direct) {
    evaluate_direct(lp, tmp, false);
  } else {
    evaluate_exponential(lp, tmp, false);
  }
  for (std::size_t i = 0; i < tmp.size(); ++i) out[i] = tmp[i].value;
}

void EventIntensitySum::evaluate_direct(const LinkedParams& lp, std::span<ComponentValue> out,
                                        bool with_gradient) const {
  const std::span<const Event> all(events_);
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    const auto hist = all.first(prefix_[i]);
    if (with_gradient) {
      out[i] = event_component(events_[targets_[i]].time, hist, m0_, lp);
      continue;
    }
    const auto& q = lp.etas;
    const double t = events_[targets_[i]].time;
    const double log_k = lp.links[kK].log_value;
    double max_log = lp.links[kMu].log_value;
    for (const auto& h : hist) {
      max_log = std::max(max_log, log_k + q.alpha * (h.magnitude - m0_) - q.p * std::log1p((t - h.time) / q.c));
    }
    double sum = std::exp(lp.links[kMu].log_value - max_log);
    for (const auto& h : hist) {
      sum += std::exp(log_k + q.alpha * (h.magnitude - m0_) - q.p * std::log1p((t - h.time) / q.c) - max_log);
    }
    out[i].value = max_log + std::log(sum);
  }
}

void EventIntensitySum::evaluate_exponential(const LinkedParams& lp, std::span<ComponentValue> out,
                                             bool with_gradient) const {
  if (events_.empty()) return;
  const auto& q = lp.etas;
  const double max_lag = events_.back().time - events_.front().time;
  const Nodes nodes = make_nodes(q.c, q.p, max_lag, with_gradient);
  const std::size_t nj = nodes.w0.size();

  // Weights are scaled by the largest magnitude so they never exceed one.
  const double log_mu = lp.links[kMu].log_value;
  const double log_trig = lp.links[kK].log_value + q.alpha * (max_magnitude_ - m0_);

  std::vector<double> acc(nj, 0.0);      // sum_h u_h exp(-rate (t - t_h))
  std::vector<double> acc_mag(with_gradient ? nj : 0, 0.0);  // same, weighted by m_h - m0
  std::vector<double> decay(nj);
  double t_acc = events_.front().time;
  bool any_parent = false;

  std::size_t next_target = 0;
  std::size_t i = 0;
  while (i < events_.size()) {
    const double t = events_[i].time;
    const double dt = t - t_acc;
    if (dt > 0.0 && any_parent) {
      for (std::size_t j = 0; j < nj; ++j) decay[j] = std::exp(-nodes.decay_rate[j] * dt);
      for (std::size_t j = 0; j < nj; ++j) acc[j] *= decay[j];
      if (with_gradient) {
        for (std::size_t j = 0; j < nj; ++j) acc_mag[j] *= decay[j];
      }
    }
    t_acc = t;
    std::size_t group_end = i;
    while (group_end < events_.size() && events_[group_end].time == t) ++group_end;

    bool group_has_target = false;
    for (std::size_t k = i; k < group_end; ++k) group_has_target = group_has_target || is_target_[k];

    if (group_has_target) {
      ComponentValue v;
      double s0 = 0.0;
      double sc = 0.0;
      double sp = 0.0;
      double sa = 0.0;
      if (any_parent) {
        for (std::size_t j = 0; j < nj; ++j) s0 += nodes.w0[j] * acc[j];
        if (with_gradient) {
          for (std::size_t j = 0; j < nj; ++j) {
            sc += nodes.wc[j] * acc[j];
            sp += nodes.wp[j] * acc[j];
            sa += nodes.w0[j] * acc_mag[j];
          }
        }
      }
      if (s0 > 0.0) {
        const double log_t = log_trig + std::log(s0);
        v.value = log_add(log_mu, log_t);
        if (with_gradient) {
          const double frac_trig = std::exp(log_t - v.value);
          v.gradient[kMu] = std::exp(log_mu - v.value) * lp.links[kMu].dlog;
          v.gradient[kK] = frac_trig * lp.links[kK].dlog;
          v.gradient[kAlpha] = frac_trig * (sa / s0) * lp.links[kAlpha].derivative;
          v.gradient[kC] = frac_trig * (sc / s0) * lp.links[kC].dlog;
          v.gradient[kP] = frac_trig * (sp / s0) * lp.links[kP].derivative;
        }
      } else {
        v.value = log_mu;
        if (with_gradient) v.gradient[kMu] = lp.links[kMu].dlog;
      }
      for (std::size_t k = i; k < group_end; ++k) {
        if (is_target_[k]) out[next_target++] = v;
      }
    }

    for (std::size_t k = i; k < group_end; ++k) {
      const double u = std::exp(q.alpha * (events_[k].magnitude - max_magnitude_));
      for (std::size_t j = 0; j < nj; ++j) acc[j] += u;
      if (with_gradient) {
        const double um = u * (events_[k].magnitude - m0_);
        for (std::size_t j = 0; j < nj; ++j) acc_mag[j] += um;
      }
    }
    any_parent = true;
    i = group_end;
  }
}

}  // namespace etas
