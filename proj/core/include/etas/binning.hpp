#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "etas/catalog.hpp"
#include "etas/model.hpp"
#include "etas/prior.hpp"

namespace etas {

/// Geometric time-bin ladder t_i, t_i + D, t_i + D(1+d), ..., t_i + D(1+d)^n, T2.
struct BinningConfig {
  double delta{0.1};  // first bin length
  double coef{1.0};   // growth ratio between consecutive bins
  int n_max{8};       // highest ladder exponent

  void validate() const;
};

/// Marks a bin that is not a full ladder rung (capped at T2 or clipped at T1).
inline constexpr int kPartialBin = -1;

struct TimeBin {
  double lo{0.0};
  double hi{0.0};
  std::int64_t parent_id{0};
  int ladder_index{kPartialBin};  // j if [lo, hi] == t_i + [o_j, o_j+1]
};

/// Ladder offsets o_0 = 0, o_1 = D, ..., o_{n_max+1} = D(1+d)^n_max.
[[nodiscard]] std::vector<double> ladder_offsets(const BinningConfig& cfg);

/// Contiguous bins covering [max(T1, t_i), T2]. History parents keep the
/// ladder anchored at t_i, clipped at T1. Boundaries closer than a relative
/// 1e-12 are merged into their successor. Throws DomainError if t_i >= T2.
[[nodiscard]] std::vector<TimeBin> make_bins(const Event& parent, const TimeDomain& domain,
                                             const BinningConfig& cfg);

using Gradient = std::array<double, kNumParams>;

/// A log-component value with its gradient in the internal scale.
struct ComponentValue {
  double value{0.0};
  Gradient gradient{};
};

/// log of the Omori integral over [a, b] (offsets from the parent) together
/// with its partial derivatives in the ETAS-scale c and p:
///   log(c/(p-1)) + log[(a/c+1)^(1-p) - (b/c+1)^(1-p)].
struct OmoriLogIntegral {
  double value{0.0};
  double c_dlog_c{0.0};  // c * d value / d c
  double d_p{0.0};       // d value / d p
};

/// Throws NumericError if the bracket underflows to zero.
[[nodiscard]] OmoriLogIntegral omori_log_integral(double from_offset, double to_offset, double c, double p);

// Components on precomputed links (the hot path used by the surrogate).
[[nodiscard]] ComponentValue background_component(double duration, const LinkedParams& lp);
[[nodiscard]] ComponentValue bin_component(double magnitude_excess, const OmoriLogIntegral& omori,
                                           const LinkedParams& lp);
/// log lambda(t | history) by log-sum-exp over {log mu} and the kernel logs.
[[nodiscard]] ComponentValue event_component(double t, std::span<const Event> history, double m0,
                                             const LinkedParams& lp);

/// log Lambda_0(T1, T2) = log(T2 - T1) + log mu.
[[nodiscard]] double log_Lambda0(const TimeDomain& domain, const InternalParams& theta, const PriorSpec& priors);

/// Exact log of the triggered count of `parent` inside `bin`.
[[nodiscard]] double log_Lambda_i(const TimeBin& bin, const Event& parent, double m0, const InternalParams& theta,
                                  const PriorSpec& priors);

/// log lambda(t_event | history_before); history must strictly precede the event.
[[nodiscard]] double log_lambda_point(const Event& event, std::span<const Event> history_before, double m0,
                                      const InternalParams& theta, const PriorSpec& priors);

struct BackgroundContext {
  TimeDomain domain;
};
struct BinContext {
  TimeBin bin;
  Event parent;
  double m0{2.5};
};
struct EventContext {
  Event event;
  std::span<const Event> history;
  double m0{2.5};
};
using ComponentContext = std::variant<BackgroundContext, BinContext, EventContext>;

[[nodiscard]] ComponentValue evaluate_component(const ComponentContext& ctx, const InternalParams& theta,
                                                const PriorSpec& priors);

/// Internal-scale gradient of a log-component (analytic, chain rule through
/// the link derivatives).
[[nodiscard]] Gradient gradient(const ComponentContext& ctx, const InternalParams& theta, const PriorSpec& priors);

}  // namespace etas
