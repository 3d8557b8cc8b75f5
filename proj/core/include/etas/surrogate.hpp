#pragma once

#include <cstddef>
#include <vector>

#include "etas/binning.hpp"
#include "etas/catalog.hpp"
#include "etas/intensity_sum.hpp"
#include "etas/prior.hpp"

namespace etas {

enum class RowKind { Background, Bin, Event };

/// One row of the Poisson-count surrogate: contributes
/// -exposure * exp(f) + count * f to the log-likelihood.
struct SurrogatePoint {
  RowKind kind{RowKind::Background};
  int count{0};
  double exposure{1.0};
  std::size_t event_index{0};  // parent (Bin) or target (Event) index into SurrogateData::events()
  TimeBin bin{};               // Bin rows only
};

struct RowEvaluation {
  std::vector<double> values;
  std::vector<Gradient> gradients;  // empty when evaluated without gradients
};

/// Background row, bin rows for every parent, then one row per modeled event.
class SurrogateData {
 public:
  SurrogateData(std::vector<SurrogatePoint> rows, std::vector<Event> events, std::vector<std::size_t> targets,
                TimeDomain domain, BinningConfig binning, IntensityStrategy strategy);

  [[nodiscard]] const std::vector<SurrogatePoint>& rows() const noexcept { return rows_; }
  [[nodiscard]] std::span<const Event> events() const noexcept { return intensity_.events(); }
  [[nodiscard]] const TimeDomain& domain() const noexcept { return domain_; }
  [[nodiscard]] const BinningConfig& binning() const noexcept { return binning_; }
  [[nodiscard]] std::size_t n_events() const noexcept { return intensity_.size(); }
  [[nodiscard]] std::size_t n_bins() const noexcept { return rows_.size() - 1 - intensity_.size(); }
  [[nodiscard]] const EventIntensitySum& intensity() const noexcept { return intensity_; }

  /// f_r(theta) for every row, with internal-scale gradients if requested.
  [[nodiscard]] RowEvaluation evaluate(const InternalParams& theta, const PriorSpec& priors,
                                       bool with_gradient = true) const;

  /// Sum over rows of -exposure exp(f) + count f: the exact ETAS
  /// log-likelihood written through the binned decomposition.
  [[nodiscard]] double log_likelihood(const InternalParams& theta, const PriorSpec& priors) const;

 private:
  std::vector<SurrogatePoint> rows_;
  TimeDomain domain_;
  BinningConfig binning_;
  std::vector<double> ladder_;
  EventIntensitySum intensity_;
};

/// Builds the surrogate for `modeled` events in [T1, T2] conditioned on
/// `history` (t < T1). Parents at or after T2 contribute no bins.
[[nodiscard]] SurrogateData assemble_surrogate(const Catalog& modeled, const Catalog& history,
                                               const TimeDomain& domain, const BinningConfig& binning = {},
                                               IntensityStrategy strategy = IntensityStrategy::Auto);

}  // namespace etas
