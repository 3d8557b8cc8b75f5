#include "etas_tools/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "etas/errors.hpp"
#include "etas/serialize.hpp"
#include "etas/simulator.hpp"
#include "etas/surrogate.hpp"
#include "etas_tools/experiments.hpp"

namespace etas::tools {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string config_text(const RunConfig& cfg) {
  std::ostringstream os;
  write_run_config(cfg, os);
  return os.str();
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void print_posterior(const PosteriorResult& p, std::ostream& os) {
  char line[160];
  std::snprintf(line, sizeof line, "%-6s %12s %12s %12s\n", "param", "mode", "2.5%", "97.5%");
  os << line;
  for (std::size_t k = 0; k < kNumParams; ++k) {
    const auto& m = p.marginals[k];
    std::snprintf(line, sizeof line, "%-6s %12.5g %12.5g %12.5g\n", std::string(kParamNames[k]).c_str(), m.mode,
                  m.lower, m.upper);
    os << line;
  }
  os << "iterations " << p.iterations << (p.converged ? " (converged)" : " (not converged)") << ", " << p.seconds
     << " s, " << p.n_events << " events, " << p.n_history << " history\n";
}

void write_fit_artifacts(const PosteriorResult& p, const fs::path& dir) {
  write_json(posterior_to_json(p), dir / "posterior.json");
  for (std::size_t k = 0; k < kNumParams; ++k) {
    std::ofstream out(dir / ("marginal_" + std::string(kParamNames[k]) + ".csv"));
    out.precision(12);
    out << "x,density\n";
    for (std::size_t j = 0; j < p.marginals[k].x.size(); ++j) {
      out << p.marginals[k].x[j] << ',' << p.marginals[k].density[j] << '\n';
    }
  }
  std::ofstream trace(dir / "trace.csv");
  trace.precision(12);
  trace << "iteration,fraction,objective,stalled,seconds";
  for (const auto n : kParamNames) trace << ",theta_" << n;
  trace << '\n';
  for (const auto& it : p.history) {
    trace << it.iteration << ',' << it.fraction << ',' << it.objective << ',' << (it.stalled ? 1 : 0) << ','
          << it.seconds;
    for (const double v : it.accepted.theta) trace << ',' << v;
    trace << '\n';
  }
  std::ofstream timing(dir / "timing.csv");
  timing << "n_events,n_history,iterations,seconds\n"
         << p.n_events << ',' << p.n_history << ',' << p.iterations << ',' << p.seconds << '\n';
  if (!p.samples.empty()) {
    std::ofstream s(dir / "samples.csv");
    s.precision(12);
    s << "mu,K,alpha,c,p\n";
    for (const auto& e : p.samples) s << e.mu << ',' << e.K << ',' << e.alpha << ',' << e.c << ',' << e.p << '\n';
  }
}

}  // namespace

std::vector<double> log_time_grid(double horizon, std::size_t points) {
  if (!(horizon > 0.0) || points < 2) throw ConfigError("triggering grid needs a positive horizon and 2+ points");
  std::vector<double> t(points);
  const double lo = std::log(horizon * 1e-4);
  const double hi = std::log(horizon);
  for (std::size_t i = 0; i < points; ++i) {
    t[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return t;
}

TriggeringCurve triggering_curve(const std::vector<EtasParams>& samples, std::optional<double> parent_magnitude,
                                 double m0, const std::vector<double>& times) {
  TriggeringCurve curve;
  if (parent_magnitude) {
    std::ostringstream name;
    name << 'm' << *parent_magnitude;
    curve.name = name.str();
  } else {
    curve.name = "omori";
  }
  curve.parent_magnitude = parent_magnitude;
  curve.times = times;
  for (const auto& s : samples) {
    std::vector<double> row(times.size());
    const double scale = parent_magnitude ? s.K * std::exp(s.alpha * (*parent_magnitude - m0)) : s.K;
    for (std::size_t i = 0; i < times.size(); ++i) row[i] = scale * std::exp(-s.p * std::log1p(times[i] / s.c));
    curve.rates.push_back(std::move(row));
  }
  if (samples.empty()) return curve;
  std::vector<double> column(samples.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t s = 0; s < samples.size(); ++s) column[s] = curve.rates[s][i];
    std::sort(column.begin(), column.end());
    curve.q025.push_back(quantile_sorted(column, 0.025));
    curve.q50.push_back(quantile_sorted(column, 0.5));
    curve.q975.push_back(quantile_sorted(column, 0.975));
  }
  return curve;
}

int cmd_simulate(const RunConfig& base, const SimulateOptions& opts) {
  RunConfig cfg = base;
  if (!opts.seed_events.empty()) {
    cfg.seed_events.clear();
    for (const auto& s : opts.seed_events) cfg.seed_events.push_back(parse_seed_event(s));
  }
  if (opts.incomplete) cfg.incompleteness = parse_incompleteness(*opts.incomplete);
  cfg.validate();

  SimulationResult sim;
  try {
    sim = simulate_catalog(cfg.simulation(cfg.seed));
  } catch (const RunawayCascadeError& e) {
    throw ConfigError(std::string("simulation aborted: ") + e.what());
  }
  fs::create_directories(cfg.out);
  write_catalog_csv(sim.catalog, cfg.out / "catalog.csv");
  write_json(genealogy_to_json(sim), cfg.out / "genealogy.json");

  json manifest = {{"command", "simulate"},
                   {"seed", cfg.seed},
                   {"params", params_to_json(cfg.sim_params)},
                   {"b_value", cfg.b_value},
                   {"domain", {{"t1", cfg.simulation_domain().t1}, {"t2", cfg.simulation_domain().t2},
                               {"m0", cfg.domain.m0}}},
                   {"n_events", sim.catalog.size()},
                   {"imposed_ids", sim.imposed_ids},
                   {"config", config_text(cfg)}};
  std::cout << "simulated " << sim.catalog.size() << " events -> " << (cfg.out / "catalog.csv").string() << '\n';
  if (cfg.incompleteness) {
    if (sim.imposed_ids.empty() && !cfg.incompleteness->all_events_above) {
      throw ConfigError("incompleteness needs a seeded mainshock (--seed-event) or incomplete.all_above");
    }
    const Catalog degraded = apply_incompleteness(sim.catalog, *cfg.incompleteness, sim.imposed_ids);
    write_catalog_csv(degraded, cfg.out / "catalog_incomplete.csv");
    manifest["incompleteness"] = {{"G", cfg.incompleteness->G}, {"H", cfg.incompleteness->H},
                                  {"n_events", degraded.size()}};
    std::cout << "incomplete catalogue keeps " << degraded.size() << " events -> "
              << (cfg.out / "catalog_incomplete.csv").string() << '\n';
  }
  write_json(manifest, cfg.out / "manifest.json");
  return kExitOk;
}

int cmd_fit(const RunConfig& base, const FitOptions& opts) {
  RunConfig cfg = base;
  if (opts.catalogue) cfg.catalogue = *opts.catalogue;
  if (opts.history_conditioning) {
    if (*opts.history_conditioning == "on") {
      cfg.history_conditioning = true;
    } else if (*opts.history_conditioning == "off") {
      cfg.history_conditioning = false;
    } else {
      throw ConfigError("--history-conditioning expects on or off");
    }
  }
  if (opts.t1) cfg.domain.t1 = *opts.t1;
  if (opts.t2) cfg.domain.t2 = *opts.t2;
  if (opts.samples) cfg.fit.n_samples = *opts.samples;
  if (opts.importance) cfg.importance_samples = *opts.importance;
  cfg.fit.sample_seed = cfg.seed;
  cfg.validate();

  fs::create_directories(cfg.out);
  Catalog catalog;
  if (cfg.catalogue) {
    try {
      catalog = load_catalog(*cfg.catalogue);
    } catch (const ParseError& e) {
      throw ConfigError(cfg.catalogue->string() + " line " + std::to_string(e.line()) + ": " + e.what());
    }
  } else {
    try {
      catalog = simulate_catalog(cfg.simulation(cfg.seed)).catalog;
    } catch (const RunawayCascadeError& e) {
      throw ConfigError(std::string("simulation aborted: ") + e.what());
    }
    write_catalog_csv(catalog, cfg.out / "catalog.csv");
  }
  {
    std::ofstream out(cfg.out / "config.ini");
    write_run_config(cfg, out);
  }

  auto split = split_domain(catalog, cfg.domain);
  if (!cfg.history_conditioning) split.history = Catalog{};
  PosteriorResult post;
  std::optional<SurrogateData> data;
  try {
    data.emplace(assemble_surrogate(split.modeled, split.history, cfg.domain, cfg.fit.binning, cfg.fit.strategy));
    post = fit(*data, cfg.fit);
  } catch (const NumericError& e) {
    std::cerr << "fit failed: " << e.what() << '\n';
    return kExitFit;
  }
  write_fit_artifacts(post, cfg.out);
  if (cfg.importance_samples > 0) {
    Rng rng = substream(cfg.seed, 7);
    const auto imp = importance_reweight(post, *data, cfg.importance_samples, rng);
    json j = {{"n", cfg.importance_samples}, {"ess", imp.ess}};
    for (std::size_t k = 0; k < kNumParams; ++k) j["mean"][std::string(kParamNames[k])] = imp.mean[k];
    write_json(j, cfg.out / "importance.json");
    std::cout << "importance reweighting: ESS " << imp.ess << " of " << cfg.importance_samples << '\n';
  }
  print_posterior(post, std::cout);
  if (!post.converged && !cfg.fit.max_step) {
    std::cerr << "fit did not converge: " << post.diagnostic << '\n';
    return kExitFit;
  }
  return kExitOk;
}

int cmd_experiment(const RunConfig& cfg, const std::string& name) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ConfigError("unknown experiment '" + name + "'");
  }
  cfg.validate();
  const ExperimentResult ex = run_experiment(name, cfg);
  const fs::path dir = cfg.out / name;
  write_bundle(ex, cfg, dir);
  std::size_t ok = 0;
  for (const auto& r : ex.runs) {
    std::cout << r.label << ": ";
    if (r.ok()) {
      ++ok;
      const auto m = r.posterior->mode();
      std::cout << "mu=" << m.mu << " K=" << m.K << " alpha=" << m.alpha << " c=" << m.c << " p=" << m.p
                << (r.posterior->converged ? "" : " (not converged)") << '\n';
    } else {
      std::cout << "failed: " << r.error << '\n';
    }
  }
  std::cout << ok << "/" << ex.runs.size() << " fits succeeded; bundle in " << dir.string() << '\n';
  return ok == 0 && !ex.runs.empty() ? kExitFit : kExitOk;
}

int cmd_triggering(const RunConfig& cfg, const TriggeringOptions& opts) {
  const PosteriorResult post = posterior_from_json(read_json(opts.posterior));
  Rng rng = substream(cfg.seed, 11);
  const auto samples = opts.from_prior ? sample_prior(post.priors, opts.samples, rng)
                                       : sample_posterior(post, opts.samples, rng);
  const double m0 = post.domain.m0;
  const auto times = log_time_grid(opts.horizon, opts.points);

  std::vector<TriggeringCurve> curves;
  curves.push_back(triggering_curve(samples, std::nullopt, m0, times));
  for (const double m : opts.magnitudes) curves.push_back(triggering_curve(samples, m, m0, times));

  fs::create_directories(cfg.out);
  for (const auto& c : curves) {
    std::ofstream s(cfg.out / ("triggering_" + c.name + "_samples.csv"));
    s.precision(10);
    s << "sample,time,rate\n";
    for (std::size_t k = 0; k < c.rates.size(); ++k) {
      for (std::size_t i = 0; i < times.size(); ++i) s << k << ',' << times[i] << ',' << c.rates[k][i] << '\n';
    }
    std::ofstream q(cfg.out / ("triggering_" + c.name + "_quantiles.csv"));
    q.precision(10);
    q << "time,q025,q50,q975\n";
    for (std::size_t i = 0; i < c.q50.size(); ++i) {
      q << times[i] << ',' << c.q025[i] << ',' << c.q50[i] << ',' << c.q975[i] << '\n';
    }
    std::cout << "wrote " << c.name << " curves (" << c.rates.size() << " samples)\n";
  }
  return kExitOk;
}

int cmd_bench(const RunConfig& base, const BenchOptions& opts) {
  RunConfig cfg = base;
  if (!opts.sizes.empty()) cfg.bench_sizes = opts.sizes;
  if (opts.repeats) cfg.bench_repeats = *opts.repeats;
  cfg.validate();
  const BenchResult res = run_bench(cfg);
  fs::create_directories(cfg.out);
  std::ofstream csv(cfg.out / "bench.csv");
  csv << "target,n_events,seconds,iterations,converged,seed\n";
  for (const auto& p : res.points) {
    csv << p.target << ',' << p.n_events << ',' << p.seconds << ',' << p.iterations << ',' << (p.converged ? 1 : 0)
        << ',' << p.seed << '\n';
    std::cout << p.n_events << " events: " << p.seconds << " s (" << p.iterations << " iterations)\n";
  }
  write_json({{"exponent", res.exponent}, {"intercept", res.intercept}}, cfg.out / "bench.json");
  std::cout << "fitted exponent " << res.exponent << '\n';
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Temporal ETAS simulation and Bayesian inversion"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "key = value run configuration");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads for multi-fit commands");

  SimulateOptions sim_opts;
  auto* sim = app.add_subcommand("simulate", "simulate a synthetic catalogue");
  sim->fallthrough();
  sim->add_option("--seed-event", sim_opts.seed_events, "imposed event time:magnitude (repeatable)");
  sim->add_option("--incomplete", sim_opts.incomplete, "also write a degraded copy, e.g. G=3.8,H=1.0");

  FitOptions fit_opts;
  std::optional<std::string> catalogue;
  auto* fit_cmd = app.add_subcommand("fit", "fit a catalogue");
  fit_cmd->fallthrough();
  fit_cmd->add_option("--catalog,--catalogue", catalogue, "catalogue CSV (time,magnitude[,id])");
  fit_cmd->add_option("--history-conditioning", fit_opts.history_conditioning, "on|off");
  fit_cmd->add_option("--T1", fit_opts.t1, "model domain start");
  fit_cmd->add_option("--T2", fit_opts.t2, "model domain end");
  fit_cmd->add_option("--samples", fit_opts.samples, "posterior samples to store");
  fit_cmd->add_option("--importance", fit_opts.importance, "importance-reweighting draws");

  std::string experiment_name;
  auto* exp = app.add_subcommand("experiment", "run a multi-fit study");
  exp->fallthrough();
  exp->add_option("name", experiment_name, "vary-init | stochastic | representative-sample | "
                                           "history-conditioning | incompleteness")
      ->required();

  TriggeringOptions trig_opts;
  std::string magnitudes;
  auto* trig = app.add_subcommand("triggering", "posterior triggering-function ensembles");
  trig->fallthrough();
  trig->add_option("--posterior", trig_opts.posterior, "posterior.json from fit")->required();
  trig->add_option("--samples", trig_opts.samples, "number of draws");
  trig->add_option("--magnitudes", magnitudes, "comma-separated parent magnitudes (default 4.0,6.7)");
  trig->add_option("--horizon", trig_opts.horizon, "time horizon in days");
  trig->add_option("--points", trig_opts.points, "grid points");
  trig->add_flag("--prior", trig_opts.from_prior, "draw from the prior instead of the posterior");

  BenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "time fits against catalogue size");
  bench->fallthrough();
  bench->add_option("--sizes", bench_opts.sizes, "target event counts")->delimiter(',');
  bench->add_option("--repeats", bench_opts.repeats, "catalogues per size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg = config_path ? load_run_config(*config_path) : RunConfig{};
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (threads) cfg.threads = *threads;

    if (sim->parsed()) return cmd_simulate(cfg, sim_opts);
    if (fit_cmd->parsed()) {
      if (catalogue) fit_opts.catalogue = *catalogue;
      return cmd_fit(cfg, fit_opts);
    }
    if (exp->parsed()) return cmd_experiment(cfg, experiment_name);
    if (trig->parsed()) {
      if (!magnitudes.empty()) {
        trig_opts.magnitudes.clear();
        std::stringstream ss(magnitudes);
        std::string item;
        while (std::getline(ss, item, ',')) {
          try {
            trig_opts.magnitudes.push_back(std::stod(item));
          } catch (const std::exception&) {
            throw ConfigError("--magnitudes: not a number: '" + item + "'");
          }
        }
      }
      return cmd_triggering(cfg, trig_opts);
    }
    if (bench->parsed()) return cmd_bench(cfg, bench_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "fit failure: " << e.what() << '\n';
    return kExitFit;
  }
  return kExitConfig;
}

}  // namespace etas::tools
