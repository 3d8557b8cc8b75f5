#include "etas/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "etas/errors.hpp"

namespace etas {

SurrogateData::SurrogateData(std::vector<SurrogatePoint> rows, std::vector<Event> events,
                             std::vector<std::size_t> targets, TimeDomain domain, BinningConfig binning,
                             IntensityStrategy strategy)
    : rows_(std::move(rows)),
      domain_(domain),
      binning_(binning),
      ladder_(ladder_offsets(binning)),
      intensity_(std::move(events), std::move(targets), domain.m0, strategy) {}

RowEvaluation SurrogateData::evaluate(const InternalParams& theta, const PriorSpec& priors,
                                      bool with_gradient) const {
  const auto lp = link(theta, priors);
  const auto evs = events();
  RowEvaluation out;
  out.values.resize(rows_.size());
  if (with_gradient) out.gradients.resize(rows_.size());

  // Full rungs of in-domain parents share their Omori terms.
  std::vector<std::optional<OmoriLogIntegral>> memo(ladder_.size());
  auto omori_for = [&](const SurrogatePoint& r) {
    const auto& parent = evs[r.event_index];
    const int j = r.bin.ladder_index;
    if (j != kPartialBin && !(parent.time < domain_.t1)) {
      auto& slot = memo[static_cast<std::size_t>(j)];
      if (!slot) slot = omori_log_integral(ladder_[j], ladder_[j + 1], lp.etas.c, lp.etas.p);
      return *slot;
    }
    return omori_log_integral(r.bin.lo - parent.time, r.bin.hi - parent.time, lp.etas.c, lp.etas.p);
  };

  std::size_t first_event_row = rows_.size();
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto& row = rows_[r];
    ComponentValue v;
    if (row.kind == RowKind::Background) {
      v = background_component(domain_.length(), lp);
    } else if (row.kind == RowKind::Bin) {
      v = bin_component(evs[row.event_index].magnitude - domain_.m0, omori_for(row), lp);
    } else {
      first_event_row = std::min(first_event_row, r);
      continue;
    }
    out.values[r] = v.value;
    if (with_gradient) out.gradients[r] = v.gradient;
  }

  const std::size_t n = intensity_.size();
  if (n > 0) {
    if (first_event_row + n != rows_.size()) throw NumericError("surrogate: event rows must be trailing");
    if (with_gradient) {
      std::vector<ComponentValue> ev(n);
      intensity_.evaluate(lp, ev);
      for (std::size_t i = 0; i < n; ++i) {
        out.values[first_event_row + i] = ev[i].value;
        out.gradients[first_event_row + i] = ev[i].gradient;
      }
    } else {
      intensity_.evaluate_values(lp, std::span<double>(out.values).subspan(first_event_row, n));
    }
  }
  return out;
}

double SurrogateData::log_likelihood(const InternalParams& theta, const PriorSpec& priors) const {
  const auto ev = evaluate(theta, priors, false);
  double total = 0.0;
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto& row = rows_[r];
    if (row.exposure != 0.0) total -= row.exposure * std::exp(ev.values[r]);
    if (row.count != 0) total += row.count * ev.values[r];
  }
  return total;
}

SurrogateData assemble_surrogate(const Catalog& modeled, const Catalog& history, const TimeDomain& domain,
                                 const BinningConfig& binning, IntensityStrategy strategy) {
  domain.validate();
  binning.validate();
  for (const auto& e : history) {
    if (!(e.time < domain.t1)) throw DomainError("assemble_surrogate: history events must precede T1");
  }
  for (const auto& e : modeled) {
    if (e.time < domain.t1 || e.time > domain.t2) {
      throw DomainError("assemble_surrogate: modeled events must lie in [T1, T2]");
    }
  }

  std::vector<Event> events(history.begin(), history.end());
  events.insert(events.end(), modeled.begin(), modeled.end());
  std::sort(events.begin(), events.end(), event_order);

  std::vector<SurrogatePoint> rows;
  rows.push_back({RowKind::Background, 0, 1.0, 0, {}});
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const bool is_modeled = !(events[i].time < domain.t1);
    if (is_modeled) targets.push_back(i);
    if (!(events[i].time < domain.t2)) continue;
    for (const auto& b : make_bins(events[i], domain, binning)) rows.push_back({RowKind::Bin, 0, 1.0, i, b});
  }
  for (const auto i : targets) rows.push_back({RowKind::Event, 1, 0.0, i, {}});
  return SurrogateData(std::move(rows), std::move(events), std::move(targets), domain, binning, strategy);
}

}  // namespace etas
