#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "etas/catalog.hpp"
#include "etas/inference.hpp"
#include "etas/simulator.hpp"
#include "etas_tools/run_config.hpp"

namespace etas::tools {

/// One fit inside an experiment. Failed fits keep their diagnostic and
/// leave `posterior` empty.
struct FitRun {
  std::string label;
  std::string catalog_label;
  double t1{0.0};
  bool history_conditioning{false};
  EtasParams initial;
  std::size_t n_events{0};
  std::size_t n_history{0};
  std::optional<PosteriorResult> posterior;
  std::string error;

  [[nodiscard]] bool ok() const noexcept { return posterior.has_value(); }
};

struct ExperimentResult {
  std::string name;
  EtasParams truth;
  std::vector<std::pair<std::string, Catalog>> catalogs;
  std::vector<FitRun> runs;
  nlohmann::json notes = nlohmann::json::object();
};

/// Runs `count` jobs on up to `threads` workers; job i writes only slot i.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job);

/// Splits `catalog` at `domain` and fits it; history is dropped unless
/// `history_conditioning` is set. Never throws on fit failure.
[[nodiscard]] FitRun fit_catalog(const Catalog& catalog, const TimeDomain& domain, bool history_conditioning,
                                 const FitConfig& fit);

/// The four starting sets of the initial-value study, in order: low,
/// high, true values, and the default-like set with p = 1.01.
[[nodiscard]] std::vector<EtasParams> starting_sets();

/// Imposed events for seeded fixtures: the configured seed events, or a
/// M6.7 on day 500 when none are configured.
[[nodiscard]] std::vector<Event> fixture_seed_events(const RunConfig& cfg);

/// Synthetic catalogue with the configured parameters; `seeded` adds the
/// fixture seed events.
[[nodiscard]] SimulationResult make_fixture(const RunConfig& cfg, bool seeded, std::uint64_t seed);

[[nodiscard]] ExperimentResult run_vary_init(const RunConfig& cfg);
/// `seeded_only` skips the unseeded half of the ensemble.
[[nodiscard]] ExperimentResult run_stochastic(const RunConfig& cfg, bool seeded_only = false);
[[nodiscard]] ExperimentResult run_representative_sample(const RunConfig& cfg,
                                                         const std::vector<double>& t1_values = {0, 250, 400, 500,
                                                                                                 501});
/// Same start dates with pre-T1 events kept as history; the cropped fits
/// are repeated alongside for comparison.
[[nodiscard]] ExperimentResult run_history_conditioning(const RunConfig& cfg,
                                                        const std::vector<double>& t1_values = {0, 250, 400, 500,
                                                                                                501});
[[nodiscard]] ExperimentResult run_incompleteness(const RunConfig& cfg);

[[nodiscard]] const std::vector<std::string>& experiment_names();
/// Throws ConfigError for an unknown name.
[[nodiscard]] ExperimentResult run_experiment(const std::string& name, const RunConfig& cfg);

/// Writes config.ini, summary.csv, summary.json, catalogues and one
/// directory per run (posterior.json + a config that refits it).
void write_bundle(const ExperimentResult& result, const RunConfig& cfg, const std::filesystem::path& dir);

/// Largest pairwise |mode_a - mode_b| / sd over runs, per internal coordinate.
[[nodiscard]] std::array<double, kNumParams> max_pairwise_deviation(const std::vector<const FitRun*>& runs);

struct BenchPoint {
  std::size_t target{0};
  std::size_t n_events{0};
  double seconds{0.0};
  int iterations{0};
  bool converged{false};
  std::uint64_t seed{0};
};

struct BenchResult {
  std::vector<BenchPoint> points;
  double exponent{0.0};   // slope of log(seconds) on log(n_events)
  double intercept{0.0};
};

/// Scales the background rate so unseeded 1000-day catalogues land near
/// each target size (draws outside [target/2, 2 target] are redrawn with
/// the next seed), then times `repeats` fits per size; every timing
/// enters the regression.
[[nodiscard]] BenchResult run_bench(const RunConfig& cfg);

/// Ordinary least squares slope/intercept of log y on log x.
[[nodiscard]] std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace etas::tools
