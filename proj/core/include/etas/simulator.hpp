#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "etas/catalog.hpp"
#include "etas/model.hpp"
#include "etas/random.hpp"

namespace etas {

/// Thrown when a cascade exceeds the configured event cap.
class RunawayCascadeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  EtasParams params;
  TimeDomain domain;  // events are generated on [t1, t2]
  MagnitudeModel magnitudes;
  std::vector<Event> seeds;  // imposed events (time, magnitude); ids are reassigned
  std::uint64_t seed{1};
  std::size_t max_events{1'000'000};

  void validate() const;
};

struct GenealogyEntry {
  std::int64_t id{0};
  std::int64_t parent_id{-1};  // -1 for background and imposed events
  int generation{0};
  bool imposed{false};
};

struct SimulationResult {
  Catalog catalog;
  std::vector<GenealogyEntry> genealogy;  // indexed by event id
  std::vector<std::int64_t> imposed_ids;
};

/// Homogeneous Poisson background on [t1, t2] with GR magnitudes.
[[nodiscard]] std::vector<Event> simulate_background(double mu, const TimeDomain& domain,
                                                     const MagnitudeModel& magnitudes, Rng& rng);

/// Inverse CDF of the Omori delay truncated to (0, horizon).
[[nodiscard]] double omori_delay_from_uniform(double u, double horizon, double c, double p);

/// Direct offspring of `parent` inside (parent.time, t2]; ids are left at 0.
[[nodiscard]] std::vector<Event> simulate_offspring(const Event& parent, const EtasParams& params,
                                                    const TimeDomain& domain, const MagnitudeModel& magnitudes,
                                                    Rng& rng);

/// Branching-process simulation generation by generation. Each parent
/// draws from its own substream keyed by its id, so results do not depend
/// on scheduling. Throws RunawayCascadeError past `max_events`.
[[nodiscard]] SimulationResult simulate_catalog(const SimConfig& cfg);

/// Short-term aftershock incompleteness: after a reference event
/// (t_r, M_r), events with m < M_r - G - H log10(t - t_r) are dropped.
struct IncompletenessModel {
  double G{3.8};
  double H{1.0};
  std::optional<double> all_events_above;  // also use every event at or above this magnitude as a reference

  void validate() const;
};

/// Throws ConfigError if no reference event is available.
[[nodiscard]] Catalog apply_incompleteness(const Catalog& catalog, const IncompletenessModel& model,
                                           std::span<const std::int64_t> reference_ids);

[[nodiscard]] nlohmann::json genealogy_to_json(const SimulationResult& sim);

}  // namespace etas
