#include "etas_tools/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "etas/errors.hpp"
#include "etas/random.hpp"
#include "etas/serialize.hpp"

namespace etas::tools {

using nlohmann::json;

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

FitRun fit_catalog(const Catalog& catalog, const TimeDomain& domain, bool history_conditioning,
                   const FitConfig& fit_cfg) {
  FitRun run;
  run.t1 = domain.t1;
  run.history_conditioning = history_conditioning;
  run.initial = fit_cfg.initial;
  try {
    auto split = split_domain(catalog, domain);
    if (!history_conditioning) split.history = Catalog{};
    run.n_events = split.modeled.size();
    run.n_history = split.history.size();
    run.posterior = fit(split.modeled, split.history, domain, fit_cfg);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  return run;
}

std::vector<EtasParams> starting_sets() {
  return {{0.05, 0.01, 1.0, 0.05, 1.01}, {5.0, 1.0, 5.0, 0.3, 1.5}, {0.1, 0.089, 2.29, 0.11, 1.08},
          {0.3, 0.1, 1.0, 0.2, 1.01}};
}

std::vector<Event> fixture_seed_events(const RunConfig& cfg) {
  if (!cfg.seed_events.empty()) return cfg.seed_events;
  return {{500.0, 6.7, 0}};
}

SimulationResult make_fixture(const RunConfig& cfg, bool seeded, std::uint64_t seed) {
  SimConfig sc = cfg.simulation(seed, false);
  if (seeded) sc.seeds = fixture_seed_events(cfg);
  return simulate_catalog(sc);
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Runs every (catalog index, domain, history, initial) job in parallel.
struct Job {
  std::string label;
  std::size_t catalog;
  TimeDomain domain;
  bool history{false};
  EtasParams initial;
};

std::vector<FitRun> run_jobs(const ExperimentResult& ex, const std::vector<Job>& jobs, const RunConfig& cfg) {
  std::vector<FitRun> runs(jobs.size());
  parallel_for(jobs.size(), cfg.thread_count(), [&](std::size_t i) {
    FitConfig fc = cfg.fit;
    fc.initial = jobs[i].initial;
    runs[i] = fit_catalog(ex.catalogs[jobs[i].catalog].second, jobs[i].domain, jobs[i].history, fc);
    runs[i].label = jobs[i].label;
    runs[i].catalog_label = ex.catalogs[jobs[i].catalog].first;
  });
  return runs;
}

TimeDomain with_t1(const RunConfig& cfg, double t1) {
  TimeDomain d = cfg.simulation_domain();
  d.t1 = t1;
  return d;
}

double rel_error(double est, double truth) { return std::abs(est - truth) / std::abs(truth); }

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

json coverage_notes(const std::vector<const FitRun*>& runs, const EtasParams& truth) {
  const auto t = truth.to_array();
  json j;
  std::array<int, kNumParams> covered{};
  std::array<std::vector<double>, kNumParams> errors;
  int ok = 0;
  for (const auto* r : runs) {
    if (!r->ok()) continue;
    ++ok;
    for (std::size_t k = 0; k < kNumParams; ++k) {
      const auto& m = r->posterior->marginals[k];
      covered[k] += (m.lower <= t[k] && t[k] <= m.upper) ? 1 : 0;
      errors[k].push_back(rel_error(m.mode, t[k]));
    }
  }
  j["fits"] = runs.size();
  j["successful"] = ok;
  for (std::size_t k = 0; k < kNumParams; ++k) {
    const std::string name(kParamNames[k]);
    j["covered"][name] = covered[k];
    j["median_relative_error"][name] = median(errors[k]);
  }
  return j;
}

}  // namespace

std::array<double, kNumParams> max_pairwise_deviation(const std::vector<const FitRun*>& runs) {
  std::array<double, kNumParams> out{};
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      if (!runs[a]->ok() || !runs[b]->ok()) {
        out.fill(std::numeric_limits<double>::infinity());
        return out;
      }
      const auto& pa = *runs[a]->posterior;
      const auto& pb = *runs[b]->posterior;
      const auto sa = pa.approx.sd();
      const auto sb = pb.approx.sd();
      for (std::size_t k = 0; k < kNumParams; ++k) {
        const double dev = std::abs(pa.approx.mode[k] - pb.approx.mode[k]) / std::min(sa[k], sb[k]);
        out[k] = std::max(out[k], dev);
      }
    }
  }
  return out;
}

ExperimentResult run_vary_init(const RunConfig& cfg) {
  ExperimentResult ex;
  ex.name = "vary-init";
  ex.truth = cfg.sim_params;
  ex.catalogs.emplace_back("unseeded", make_fixture(cfg, false, cfg.seed).catalog);
  ex.catalogs.emplace_back("seeded", make_fixture(cfg, true, cfg.seed).catalog);
  const auto starts = starting_sets();
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < ex.catalogs.size(); ++c) {
    for (std::size_t s = 0; s < starts.size(); ++s) {
      jobs.push_back({ex.catalogs[c].first + "-start" + std::to_string(s + 1), c, with_t1(cfg, cfg.simulation_domain().t1),
                      false, starts[s]});
    }
  }
  ex.runs = run_jobs(ex, jobs, cfg);
  for (std::size_t c = 0; c < ex.catalogs.size(); ++c) {
    std::vector<const FitRun*> group;
    for (const auto& r : ex.runs) {
      if (r.catalog_label == ex.catalogs[c].first) group.push_back(&r);
    }
    const auto dev = max_pairwise_deviation(group);
    for (std::size_t k = 0; k < kNumParams; ++k) {
      ex.notes["max_pairwise_deviation_sd"][ex.catalogs[c].first][std::string(kParamNames[k])] = dev[k];
    }
  }
  return ex;
}

ExperimentResult run_stochastic(const RunConfig& cfg, bool seeded_only) {
  ExperimentResult ex;
  ex.name = "stochastic";
  ex.truth = cfg.sim_params;
  std::vector<std::pair<std::string, bool>> kinds;
  if (!seeded_only) kinds.emplace_back("unseeded", false);
  kinds.emplace_back("seeded", true);
  for (const auto& [kind, seeded] : kinds) {
    for (int r = 1; r <= cfg.replicates; ++r) {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
      std::string label = kind + "-" + std::to_string(r);
      try {
        ex.catalogs.emplace_back(label, make_fixture(cfg, seeded, seed).catalog);
      } catch (const RunawayCascadeError& e) {
        ex.notes["simulation_failures"][label] = e.what();
      }
    }
  }
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < ex.catalogs.size(); ++c) {
    jobs.push_back({ex.catalogs[c].first, c, with_t1(cfg, cfg.simulation_domain().t1), false, cfg.fit.initial});
  }
  ex.runs = run_jobs(ex, jobs, cfg);
  for (const auto& [kind, seeded] : kinds) {
    std::vector<const FitRun*> group;
    for (const auto& r : ex.runs) {
      if (r.catalog_label.rfind(kind + "-", 0) == 0) group.push_back(&r);
    }
    ex.notes[kind] = coverage_notes(group, ex.truth);
  }
  return ex;
}

ExperimentResult run_representative_sample(const RunConfig& cfg, const std::vector<double>& t1_values) {
  ExperimentResult ex;
  ex.name = "representative-sample";
  ex.truth = cfg.sim_params;
  ex.catalogs.emplace_back("seeded", make_fixture(cfg, true, cfg.seed).catalog);
  std::vector<Job> jobs;
  for (const double t1 : t1_values) jobs.push_back({"T1=" + fmt(t1), 0, with_t1(cfg, t1), false, cfg.fit.initial});
  ex.runs = run_jobs(ex, jobs, cfg);
  for (const auto& r : ex.runs) {
    if (r.ok()) ex.notes["mu_mode_over_truth"][r.label] = r.posterior->marginals[kMu].mode / ex.truth.mu;
  }
  return ex;
}

ExperimentResult run_history_conditioning(const RunConfig& cfg, const std::vector<double>& t1_values) {
  ExperimentResult ex;
  ex.name = "history-conditioning";
  ex.truth = cfg.sim_params;
  ex.catalogs.emplace_back("seeded", make_fixture(cfg, true, cfg.seed).catalog);
  std::vector<Job> jobs;
  for (const double t1 : t1_values) {
    jobs.push_back({"T1=" + fmt(t1) + "-cropped", 0, with_t1(cfg, t1), false, cfg.fit.initial});
    jobs.push_back({"T1=" + fmt(t1) + "-history", 0, with_t1(cfg, t1), true, cfg.fit.initial});
  }
  ex.runs = run_jobs(ex, jobs, cfg);
  const auto truth = ex.truth.to_array();
  for (std::size_t i = 0; i + 1 < ex.runs.size(); i += 2) {
    const auto& off = ex.runs[i];
    const auto& on = ex.runs[i + 1];
    if (!off.ok() || !on.ok()) continue;
    const std::string key = "T1=" + fmt(off.t1);
    for (std::size_t k = 0; k < kNumParams; ++k) {
      const std::string name(kParamNames[k]);
      ex.notes["abs_error"][key]["cropped"][name] = std::abs(off.posterior->marginals[k].mode - truth[k]);
      ex.notes["abs_error"][key]["history"][name] = std::abs(on.posterior->marginals[k].mode - truth[k]);
    }
  }
  return ex;
}

ExperimentResult run_incompleteness(const RunConfig& cfg) {
  ExperimentResult ex;
  ex.name = "incompleteness";
  ex.truth = cfg.sim_params;
  const auto sim = make_fixture(cfg, true, cfg.seed);
  const IncompletenessModel model = cfg.incompleteness.value_or(IncompletenessModel{});
  const Catalog degraded = apply_incompleteness(sim.catalog, model, sim.imposed_ids);
  ex.catalogs.emplace_back("complete", sim.catalog);
  ex.catalogs.emplace_back("incomplete", degraded);
  const TimeDomain dom = with_t1(cfg, cfg.simulation_domain().t1);
  ex.runs = run_jobs(ex, {{"complete", 0, dom, false, cfg.fit.initial}, {"incomplete", 1, dom, false, cfg.fit.initial}},
                     cfg);
  ex.notes["n_complete"] = sim.catalog.size();
  ex.notes["n_incomplete"] = degraded.size();
  ex.notes["removed_fraction"] =
      sim.catalog.empty() ? 0.0 : 1.0 - static_cast<double>(degraded.size()) / static_cast<double>(sim.catalog.size());
  ex.notes["G"] = model.G;
  ex.notes["H"] = model.H;
  return ex;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"vary-init", "stochastic", "representative-sample",
                                              "history-conditioning", "incompleteness"};
  return names;
}

ExperimentResult run_experiment(const std::string& name, const RunConfig& cfg) {
  if (name == "vary-init") return run_vary_init(cfg);
  if (name == "stochastic") return run_stochastic(cfg);
  if (name == "representative-sample") return run_representative_sample(cfg);
  if (name == "history-conditioning") return run_history_conditioning(cfg);
  if (name == "incompleteness") return run_incompleteness(cfg);
  throw ConfigError("unknown experiment '" + name + "'");
}

void write_bundle(const ExperimentResult& ex, const RunConfig& cfg, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "catalogs");
  fs::create_directories(dir / "runs");
  {
    std::ofstream out(dir / "config.ini");
    write_run_config(cfg, out);
  }
  for (const auto& [label, cat] : ex.catalogs) write_catalog_csv(cat, dir / "catalogs" / (label + ".csv"));

  const auto truth = ex.truth.to_array();
  std::ofstream csv(dir / "summary.csv");
  csv.precision(10);
  csv << "label,catalog,t1,history,n_events,n_history,ok,converged,iterations,seconds";
  for (const auto name : kParamNames) {
    csv << ',' << name << "_mode," << name << "_lower," << name << "_upper," << name << "_true," << name
        << "_covered";
  }
  csv << ",diagnostic\n";

  json runs = json::array();
  for (const auto& r : ex.runs) {
    const fs::path run_dir = dir / "runs" / r.label;
    fs::create_directories(run_dir);
    RunConfig rc = cfg;
    rc.catalogue = fs::absolute(dir / "catalogs" / (r.catalog_label + ".csv"));
    rc.domain = with_t1(cfg, r.t1);
    rc.history_conditioning = r.history_conditioning;
    rc.fit.initial = r.initial;
    rc.seed_events.clear();
    {
      std::ofstream out(run_dir / "config.ini");
      write_run_config(rc, out);
    }

    json jr = {{"label", r.label}, {"catalog", r.catalog_label}, {"t1", r.t1},
               {"history", r.history_conditioning}, {"n_events", r.n_events}, {"n_history", r.n_history},
               {"ok", r.ok()}, {"error", r.error}};
    csv << r.label << ',' << r.catalog_label << ',' << r.t1 << ',' << (r.history_conditioning ? "on" : "off") << ','
        << r.n_events << ',' << r.n_history << ',' << (r.ok() ? 1 : 0) << ',';
    if (r.ok()) {
      const auto& p = *r.posterior;
      write_json(posterior_to_json(p), run_dir / "posterior.json");
      csv << (p.converged ? 1 : 0) << ',' << p.iterations << ',' << p.seconds;
      jr["converged"] = p.converged;
      jr["iterations"] = p.iterations;
      jr["seconds"] = p.seconds;
      for (std::size_t k = 0; k < kNumParams; ++k) {
        const auto& m = p.marginals[k];
        const bool cov = m.lower <= truth[k] && truth[k] <= m.upper;
        csv << ',' << m.mode << ',' << m.lower << ',' << m.upper << ',' << truth[k] << ',' << (cov ? 1 : 0);
        jr["summary"][std::string(kParamNames[k])] = {
            {"mode", m.mode}, {"lower", m.lower}, {"upper", m.upper}, {"true", truth[k]}, {"covered", cov}};
      }
      csv << ',' << p.diagnostic << '\n';
    } else {
      csv << "0,0,0";
      for (std::size_t k = 0; k < kNumParams; ++k) csv << ",,,," << truth[k] << ',';
      csv << ',' << r.error << '\n';
    }
    runs.push_back(jr);
  }
  json summary = {{"experiment", ex.name}, {"truth", params_to_json(ex.truth)}, {"notes", ex.notes}, {"runs", runs}};
  write_json(summary, dir / "summary.json");
}

std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_fit needs at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw DomainError("loglog_fit needs distinct x values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

BenchResult run_bench(const RunConfig& cfg) {
  // Typical unseeded catalogue size at the configured rate.
  std::vector<double> pilot;
  for (std::uint64_t s = 0; s < 9; ++s) {
    try {
      pilot.push_back(static_cast<double>(make_fixture(cfg, false, mix64(cfg.seed ^ (s + 1))).catalog.size()));
    } catch (const RunawayCascadeError&) {
    }
  }
  const double base = std::max(1.0, median(pilot));

  BenchResult res;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const std::size_t target : cfg.bench_sizes) {
    RunConfig rc = cfg;
    rc.sim_params.mu = cfg.sim_params.mu * static_cast<double>(target) / base;
    for (int rep = 0; rep < cfg.bench_repeats; ++rep) {
      std::optional<SimulationResult> chosen;
      std::uint64_t chosen_seed = 0;
      double best_gap = std::numeric_limits<double>::infinity();
      for (std::uint64_t attempt = 0; attempt < 50; ++attempt) {
        const std::uint64_t seed = mix64(cfg.seed + 0x9e37 * target + 0x51 * static_cast<std::uint64_t>(rep) + attempt);
        std::optional<SimulationResult> sim;
        try {
          sim = make_fixture(rc, false, seed);
        } catch (const RunawayCascadeError&) {
          continue;
        }
        const double n = static_cast<double>(sim->catalog.size());
        const double gap = std::abs(std::log(n / static_cast<double>(target)));
        if (gap < best_gap) {
          best_gap = gap;
          chosen = std::move(sim);
          chosen_seed = seed;
        }
        if (gap <= std::log(2.0)) break;
      }
      if (!chosen) throw NumericError("bench: no usable catalogue for size " + std::to_string(target));

      const auto t0 = std::chrono::steady_clock::now();
      const FitRun run = fit_catalog(chosen->catalog, rc.simulation_domain(), false, cfg.fit);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!run.ok()) throw NumericError("bench fit failed: " + run.error);
      res.points.push_back({target, run.n_events, seconds, run.posterior->iterations, run.posterior->converged,
                            chosen_seed});
      xs.push_back(static_cast<double>(run.n_events));
      ys.push_back(seconds);
    }
  }
  std::tie(res.exponent, res.intercept) = loglog_fit(xs, ys);
  return res;
}

}  // namespace etas::tools
