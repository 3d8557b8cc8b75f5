#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "etas/binning.hpp"
#include "etas/catalog.hpp"
#include "etas/prior.hpp"

namespace etas {

enum class IntensityStrategy {
  Auto,            // ExponentialSum above kExponentialSumThreshold events, Direct below
  Direct,          // pairwise log-sum-exp, O(n^2)
  ExponentialSum,  // power law as a sum of decaying exponentials, O(n * nodes)
};

inline constexpr std::size_t kExponentialSumThreshold = 400;

/// Evaluates log lambda(t_i | H_{t_i}) and its internal-scale gradient for
/// every target event of a sorted event set. Every event (history or
/// modeled) acts as a parent of all strictly later events.
///
/// The exponential-sum path writes
///   x^-p = 1/Gamma(p) * integral exp(p y - e^y x) dy
/// and discretizes it with the trapezoid rule in y (step 0.2, range chosen
/// from the largest lag), which reproduces the power law to ~1e-14
/// relative. Each node then decays exponentially in time, so the history
/// sums follow a one-pass recursion.
class EventIntensitySum {
 public:
  EventIntensitySum() = default;
  /// `events` must be sorted by `event_order`; `targets` are indices into it.
  EventIntensitySum(std::vector<Event> events, std::vector<std::size_t> targets, double m0,
                    IntensityStrategy strategy = IntensityStrategy::Auto);

  [[nodiscard]] std::size_t size() const noexcept { return targets_.size(); }
  [[nodiscard]] IntensityStrategy strategy() const noexcept { return strategy_; }
  [[nodiscard]] std::span<const Event> events() const noexcept { return events_; }
  [[nodiscard]] std::span<const std::size_t> targets() const noexcept { return targets_; }

  /// Number of events strictly preceding target `i` (its history prefix).
  [[nodiscard]] std::size_t history_size(std::size_t i) const noexcept { return prefix_[i]; }

  void evaluate(const LinkedParams& lp, std::span<ComponentValue> out) const;
  void evaluate_values(const LinkedParams& lp, std::span<double> out) const;

 private:
  void evaluate_direct(const LinkedParams& lp, std::span<ComponentValue> out, bool with_gradient) const;
  void evaluate_exponential(const LinkedParams& lp, std::span<ComponentValue> out, bool with_gradient) const;

  std::vector<Event> events_;
  std::vector<std::size_t> targets_;
  std::vector<std::size_t> prefix_;
  std::vector<char> is_target_;
  double m0_{2.5};
  double max_magnitude_{0.0};
  IntensityStrategy strategy_{IntensityStrategy::Direct};
};

}  // namespace etas
