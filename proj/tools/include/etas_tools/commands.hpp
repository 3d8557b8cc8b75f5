#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "etas/inference.hpp"
#include "etas/model.hpp"
#include "etas/random.hpp"
#include "etas_tools/run_config.hpp"

namespace etas::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFit = 3;

/// Rates on a time grid for each posterior (or prior) draw.
struct TriggeringCurve {
  std::string name;                     // "omori" or "m<magnitude>"
  std::optional<double> parent_magnitude;  // empty for the magnitude-free Omori curve
  std::vector<double> times;
  std::vector<std::vector<double>> rates;  // [sample][time]
  std::vector<double> q025, q50, q975;
};

/// Log-spaced grid of `points` times over [horizon * 1e-4, horizon].
[[nodiscard]] std::vector<double> log_time_grid(double horizon, std::size_t points);

/// Omori curve K ((t/c) + 1)^-p when `parent_magnitude` is empty, otherwise
/// the full triggering rate of a parent of that magnitude.
[[nodiscard]] TriggeringCurve triggering_curve(const std::vector<EtasParams>& samples,
                                               std::optional<double> parent_magnitude, double m0,
                                               const std::vector<double>& times);

struct SimulateOptions {
  std::vector<std::string> seed_events;  // "t:m"
  std::optional<std::string> incomplete;  // "G=..,H=.."
};

struct FitOptions {
  std::optional<std::filesystem::path> catalogue;
  std::optional<std::string> history_conditioning;  // on|off
  std::optional<double> t1;
  std::optional<double> t2;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> importance;
};

struct TriggeringOptions {
  std::filesystem::path posterior;
  std::size_t samples{100};
  std::vector<double> magnitudes{4.0, 6.7};
  double horizon{1.0};
  std::size_t points{200};
  bool from_prior{false};
};

struct BenchOptions {
  std::vector<std::size_t> sizes;
  std::optional<int> repeats;
};

int cmd_simulate(const RunConfig& cfg, const SimulateOptions& opts);
int cmd_fit(const RunConfig& cfg, const FitOptions& opts);
int cmd_experiment(const RunConfig& cfg, const std::string& name);
int cmd_triggering(const RunConfig& cfg, const TriggeringOptions& opts);
int cmd_bench(const RunConfig& cfg, const BenchOptions& opts);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace etas::tools
