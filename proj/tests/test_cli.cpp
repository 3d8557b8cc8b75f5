#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "etas/serialize.hpp"
#include "etas_tools/commands.hpp"
#include "etas_tools/experiments.hpp"

using namespace etas;
using namespace etas::tools;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "etas");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("etas_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, SimulateIsDeterministicAndWritesProvenance) {
  const fs::path dir = scratch("sim");
  ASSERT_EQ(run({"--seed", "4", "--out", (dir / "a").string(), "simulate", "--seed-event", "300:6.0", "--incomplete",
                 "G=3.8,H=1.0"}),
            kExitOk);
  ASSERT_EQ(run({"simulate", "--seed", "4", "--out", (dir / "b").string(), "--seed-event", "300:6.0"}), kExitOk);
  EXPECT_EQ(slurp(dir / "a" / "catalog.csv"), slurp(dir / "b" / "catalog.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "genealogy.json"));
  EXPECT_TRUE(fs::exists(dir / "a" / "catalog_incomplete.csv"));
  const auto manifest = read_json(dir / "a" / "manifest.json");
  EXPECT_EQ(manifest.at("seed").get<int>(), 4);
  EXPECT_TRUE(manifest.contains("incompleteness"));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("codes");
  {
    std::ofstream cfg(dir / "bad.ini");
    cfg << "mu.innit = 0.3\n";
  }
  EXPECT_EQ(run({"--config", (dir / "bad.ini").string(), "fit"}), kExitConfig);
  EXPECT_EQ(run({"fit", "--catalog", (dir / "missing.csv").string()}), kExitConfig);
  EXPECT_EQ(run({"experiment", "nonsense"}), kExitConfig);
  EXPECT_EQ(run({"frobnicate"}), kExitConfig);
  EXPECT_EQ(run({"fit", "--history-conditioning", "maybe"}), kExitConfig);

  ASSERT_EQ(run({"--seed", "5", "--out", (dir / "sim").string(), "simulate"}), kExitOk);
  EXPECT_EQ(run({"--out", (dir / "fit").string(), "fit", "--catalog", (dir / "sim" / "catalog.csv").string(),
                 "--samples", "20"}),
            kExitOk);
  for (const char* f : {"posterior.json", "trace.csv", "timing.csv", "marginal_mu.csv", "samples.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "fit" / f)) << f;
  }
  {
    std::ofstream cfg(dir / "short.ini");
    cfg << "max_iter = 1\n";
  }
  EXPECT_EQ(run({"--config", (dir / "short.ini").string(), "--out", (dir / "fit1").string(), "fit", "--catalog",
                 (dir / "sim" / "catalog.csv").string()}),
            kExitFit);
  EXPECT_TRUE(fs::exists(dir / "fit1" / "posterior.json"));
}

TEST(Cli, TriggeringCurvesFromPosterior) {
  const fs::path dir = scratch("trig");
  ASSERT_EQ(run({"--seed", "5", "--out", dir.string(), "fit"}), kExitOk);
  ASSERT_EQ(run({"--out", (dir / "t").string(), "triggering", "--posterior", (dir / "posterior.json").string(),
                 "--samples", "30"}),
            kExitOk);
  for (const char* f : {"triggering_omori_quantiles.csv", "triggering_m4_samples.csv", "triggering_m6.7_quantiles.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "t" / f)) << f;
  }
  EXPECT_EQ(run({"--out", (dir / "p").string(), "triggering", "--posterior", (dir / "posterior.json").string(),
                 "--prior"}),
            kExitOk);
}

TEST(Cli, TriggeringCurveShapes) {
  const std::vector<EtasParams> samples{{0.1, 0.1, 2.0, 0.1, 1.1}, {0.1, 0.2, 1.0, 0.2, 1.2}, {0.1, 0.3, 1.5, 0.1, 1.3}};
  const auto t = log_time_grid(1.0, 50);
  ASSERT_EQ(t.size(), 50u);
  EXPECT_NEAR(t.front(), 1e-4, 1e-15);
  EXPECT_NEAR(t.back(), 1.0, 1e-12);
  const auto omori = triggering_curve(samples, std::nullopt, 2.5, t);
  const auto big = triggering_curve(samples, 6.7, 2.5, t);
  EXPECT_EQ(omori.name, "omori");
  EXPECT_EQ(big.name, "m6.7");
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_NEAR(big.rates[s][i] / omori.rates[s][i], std::exp(samples[s].alpha * 4.2), 1e-9);
    }
  }
  EXPECT_NEAR(omori.rates[1][0], 0.2 * std::pow(1e-4 / 0.2 + 1.0, -1.2), 1e-14);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_LE(omori.q025[i], omori.q50[i]);
    EXPECT_LE(omori.q50[i], omori.q975[i]);
  }
}

TEST(Cli, BundleRunsRefitToTheStoredPosterior) {
  const fs::path dir = scratch("bundle");
  RunConfig cfg;
  cfg.seed = 5;
  ExperimentResult ex;
  ex.name = "mini";
  ex.truth = cfg.sim_params;
  ex.catalogs.emplace_back("unseeded", make_fixture(cfg, false, cfg.seed).catalog);
  FitConfig fc = cfg.fit;
  fc.initial = starting_sets()[1];
  TimeDomain d = cfg.simulation_domain();
  d.t1 = 250.0;
  FitRun r = fit_catalog(ex.catalogs[0].second, d, true, fc);
  ASSERT_TRUE(r.ok()) << r.error;
  r.label = "run";
  r.catalog_label = "unseeded";
  ex.runs.push_back(r);
  write_bundle(ex, cfg, dir);
  ASSERT_TRUE(fs::exists(dir / "summary.csv"));
  ASSERT_TRUE(fs::exists(dir / "summary.json"));

  ASSERT_EQ(run({"--config", (dir / "runs" / "run" / "config.ini").string(), "--out", (dir / "refit").string(), "fit"}),
            kExitOk);
  const auto stored = posterior_from_json(read_json(dir / "runs" / "run" / "posterior.json"));
  const auto again = posterior_from_json(read_json(dir / "refit" / "posterior.json"));
  EXPECT_EQ(again.n_history, stored.n_history);
  EXPECT_GT(stored.n_history, 0u);
  for (std::size_t k = 0; k < kNumParams; ++k) {
    EXPECT_NEAR(again.marginals[k].mode, stored.marginals[k].mode, 1e-8 * std::abs(stored.marginals[k].mode));
    EXPECT_NEAR(again.marginals[k].upper, stored.marginals[k].upper, 1e-8 * std::abs(stored.marginals[k].upper));
  }
}
