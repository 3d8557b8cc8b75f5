#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "etas/catalog.hpp"
#include "etas/inference.hpp"
#include "etas/model.hpp"
#include "etas/simulator.hpp"

namespace etas::tools {

/// Everything a command needs, read from a flat `key = value` file using
/// the conventional ETAS input-list names (mu.init, a_mu, Nmax, ...).
struct RunConfig {
  std::optional<std::filesystem::path> catalogue;
  TimeDomain domain;
  FitConfig fit;
  bool history_conditioning{true};
  std::size_t importance_samples{0};

  // Synthetic catalogue used when no catalogue file is given.
  EtasParams sim_params;
  double b_value{1.0};
  std::optional<TimeDomain> sim_domain;  // defaults to `domain`
  std::vector<Event> seed_events;
  std::size_t max_events{1'000'000};
  std::optional<IncompletenessModel> incompleteness;

  std::uint64_t seed{1};
  unsigned threads{0};  // 0 = hardware concurrency
  std::filesystem::path out{"out"};

  int replicates{10};
  std::vector<std::size_t> bench_sizes{250, 500, 1000, 2000, 3500, 5000};
  int bench_repeats{1};

  /// Throws ConfigError on the first inconsistency.
  void validate() const;
  [[nodiscard]] unsigned thread_count() const;
  [[nodiscard]] TimeDomain simulation_domain() const;
  [[nodiscard]] SimConfig simulation(std::uint64_t seed_value, bool with_seed_events = true) const;
};

/// Parses `key = value` lines (INI syntax; `[section]` headers prefix keys
/// with `section.`). Unknown keys and malformed values raise ConfigError.
[[nodiscard]] RunConfig parse_run_config(std::istream& in);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

/// Writes every setting back in the same format.
void write_run_config(const RunConfig& cfg, std::ostream& out);

/// "500:6.7" -> Event{500, 6.7}.
[[nodiscard]] Event parse_seed_event(const std::string& text);
/// "G=3.8,H=1.0" (either key optional) -> IncompletenessModel.
[[nodiscard]] IncompletenessModel parse_incompleteness(const std::string& text);

}  // namespace etas::tools
