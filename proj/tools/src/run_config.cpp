#include "etas_tools/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "etas/errors.hpp"

namespace etas::tools {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  Int out{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool is_null(const std::string& v) {
  std::string t = trim(v);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  return t.empty() || t == "null" || t == "none" || t == "off";
}

bool to_bool(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "on" || t == "true" || t == "yes" || t == "1") return true;
  if (t == "off" || t == "false" || t == "no" || t == "0") return false;
  throw ConfigError(key + ": expected on/off, got '" + v + "'");
}

std::pair<double, double> to_interval(const std::string& key, const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.size() != 2) throw ConfigError(key + ": expected 'start,end', got '" + v + "'");
  return {to_double(key, parts[0]), to_double(key, parts[1])};
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

double& param_ref(EtasParams& p, std::size_t k) {
  switch (k) {
    case kMu:
      return p.mu;
    case kK:
      return p.K;
    case kAlpha:
      return p.alpha;
    case kC:
      return p.c;
    default:
      return p.p;
  }
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["catalogue"] = [](RunConfig& c, const std::string&, const std::string& v) {
      if (is_null(v)) {
        c.catalogue.reset();
      } else {
        c.catalogue = trim(v);
      }
    };
    t["T12"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      std::tie(c.domain.t1, c.domain.t2) = to_interval(k, v);
    };
    t["M0"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.domain.m0 = to_double(k, v); };
    for (std::size_t i = 0; i < kNumParams; ++i) {
      const std::string name(kParamNames[i]);
      t[name + ".init"] = [i](RunConfig& c, const std::string& k, const std::string& v) {
        param_ref(c.fit.initial, i) = to_double(k, v);
      };
      t["a_" + name] = [i](RunConfig& c, const std::string& k, const std::string& v) {
        c.fit.priors[i].a = to_double(k, v);
      };
      t["b_" + name] = [i](RunConfig& c, const std::string& k, const std::string& v) {
        c.fit.priors[i].b = to_double(k, v);
      };
      t["sim." + name] = [i](RunConfig& c, const std::string& k, const std::string& v) {
        param_ref(c.sim_params, i) = to_double(k, v);
      };
    }
    t["Nmax"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fit.binning.n_max = to_int<int>(k, v);
    };
    t["coef.t"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fit.binning.coef = to_double(k, v);
    };
    t["delta.t"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fit.binning.delta = to_double(k, v);
    };
    t["max_iter"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fit.max_iter = to_int<int>(k, v);
    };
    t["max_step"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (is_null(v)) {
        c.fit.max_step.reset();
      } else {
        c.fit.max_step = to_double(k, v);
      }
    };
    t["conv.fraction"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fit.convergence_fraction = to_double(k, v);
    };
    t["n.samples"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.fit.n_samples = to_int<std::size_t>(k, v);
    };
    t["importance.samples"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.importance_samples = to_int<std::size_t>(k, v);
    };
    t["history.conditioning"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.history_conditioning = to_bool(k, v);
    };
    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.seed = to_int<std::uint64_t>(k, v);
    };
    t["num.threads"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.threads = to_int<unsigned>(k, v);
    };
    t["out"] = [](RunConfig& c, const std::string&, const std::string& v) { c.out = trim(v); };
    t["sim.b"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.b_value = to_double(k, v); };
    t["sim.T12"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (is_null(v)) {
        c.sim_domain.reset();
        return;
      }
      TimeDomain d;
      std::tie(d.t1, d.t2) = to_interval(k, v);
      c.sim_domain = d;
    };
    t["sim.seed_events"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.seed_events.clear();
      if (is_null(v)) return;
      for (const auto& item : split(v, ';')) c.seed_events.push_back(parse_seed_event(item));
    };
    t["sim.max_events"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.max_events = to_int<std::size_t>(k, v);
    };
    t["incomplete"] = [](RunConfig& c, const std::string&, const std::string& v) {
      if (is_null(v)) {
        c.incompleteness.reset();
      } else {
        const auto keep = c.incompleteness ? c.incompleteness->all_events_above : std::nullopt;
        c.incompleteness = parse_incompleteness(v);
        c.incompleteness->all_events_above = keep;
      }
    };
    t["incomplete.all_above"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (!c.incompleteness) c.incompleteness = IncompletenessModel{};
      if (is_null(v)) {
        c.incompleteness->all_events_above.reset();
      } else {
        c.incompleteness->all_events_above = to_double(k, v);
      }
    };
    t["replicates"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.replicates = to_int<int>(k, v);
    };
    t["bench.sizes"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.bench_sizes.clear();
      for (const auto& s : split(v, ',')) c.bench_sizes.push_back(to_int<std::size_t>(k, s));
    };
    t["bench.repeats"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.bench_repeats = to_int<int>(k, v);
    };
    return t;
  }();
  return table;
}

}  // namespace

Event parse_seed_event(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("seed event must be 'time:magnitude', got '" + text + "'");
  return {to_double("seed event time", text.substr(0, colon)),
          to_double("seed event magnitude", text.substr(colon + 1)), 0};
}

IncompletenessModel parse_incompleteness(const std::string& text) {
  IncompletenessModel m;
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("incompleteness expects G=..,H=.., got '" + text + "'");
    const std::string key = trim(item.substr(0, eq));
    const double value = to_double("incompleteness " + key, item.substr(eq + 1));
    if (key == "G") {
      m.G = value;
    } else if (key == "H") {
      m.H = value;
    } else {
      throw ConfigError("unknown incompleteness parameter '" + key + "'");
    }
  }
  m.validate();
  return m;
}

void RunConfig::validate() const {
  try {
    domain.validate();
    fit.validate();
    if (sim_domain) sim_domain->validate();
    SimConfig sc = simulation(seed);
    sc.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (catalogue && !std::filesystem::exists(*catalogue)) {
    throw ConfigError("catalogue file not found: " + catalogue->string());
  }
  if (incompleteness) incompleteness->validate();
  if (replicates < 1) throw ConfigError("replicates must be at least 1");
  if (bench_sizes.empty()) throw ConfigError("bench.sizes must not be empty");
  if (bench_repeats < 1) throw ConfigError("bench.repeats must be at least 1");
  if (max_events == 0) throw ConfigError("sim.max_events must be positive");
}

unsigned RunConfig::thread_count() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

TimeDomain RunConfig::simulation_domain() const {
  TimeDomain d = sim_domain.value_or(domain);
  d.m0 = domain.m0;
  return d;
}

SimConfig RunConfig::simulation(std::uint64_t seed_value, bool with_seed_events) const {
  SimConfig sc;
  sc.params = sim_params;
  sc.domain = simulation_domain();
  sc.magnitudes = {b_value, domain.m0};
  if (with_seed_events) sc.seeds = seed_events;
  sc.seed = seed_value;
  sc.max_events = max_events;
  return sc;
}

RunConfig parse_run_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig cfg;
  const auto& table = setters();
  auto apply = [&](const std::string& key, const std::string& value) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
  };
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      apply(name, node.data());
      continue;
    }
    for (const auto& [sub, leaf] : node) apply(name + "." + sub, leaf.data());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_run_config(in);
}

void write_run_config(const RunConfig& cfg, std::ostream& out) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "catalogue = " << (cfg.catalogue ? cfg.catalogue->string() : "none") << '\n';
  out << "T12 = " << cfg.domain.t1 << ',' << cfg.domain.t2 << '\n';
  out << "M0 = " << cfg.domain.m0 << '\n';
  const auto init = cfg.fit.initial.to_array();
  for (std::size_t k = 0; k < kNumParams; ++k) out << kParamNames[k] << ".init = " << init[k] << '\n';
  for (std::size_t k = 0; k < kNumParams; ++k) {
    out << "a_" << kParamNames[k] << " = " << cfg.fit.priors[k].a << '\n';
    out << "b_" << kParamNames[k] << " = " << cfg.fit.priors[k].b << '\n';
  }
  out << "Nmax = " << cfg.fit.binning.n_max << '\n';
  out << "coef.t = " << cfg.fit.binning.coef << '\n';
  out << "delta.t = " << cfg.fit.binning.delta << '\n';
  out << "max_iter = " << cfg.fit.max_iter << '\n';
  out << "max_step = ";
  if (cfg.fit.max_step) {
    out << *cfg.fit.max_step << '\n';
  } else {
    out << "none\n";
  }
  out << "conv.fraction = " << cfg.fit.convergence_fraction << '\n';
  out << "n.samples = " << cfg.fit.n_samples << '\n';
  out << "importance.samples = " << cfg.importance_samples << '\n';
  out << "history.conditioning = " << (cfg.history_conditioning ? "on" : "off") << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "num.threads = " << cfg.threads << '\n';
  out << "out = " << cfg.out.string() << '\n';
  const auto sim = cfg.sim_params.to_array();
  for (std::size_t k = 0; k < kNumParams; ++k) out << "sim." << kParamNames[k] << " = " << sim[k] << '\n';
  out << "sim.b = " << cfg.b_value << '\n';
  out << "sim.T12 = ";
  if (cfg.sim_domain) {
    out << cfg.sim_domain->t1 << ',' << cfg.sim_domain->t2 << '\n';
  } else {
    out << "none\n";
  }
  out << "sim.seed_events = ";
  if (cfg.seed_events.empty()) out << "none";
  for (std::size_t i = 0; i < cfg.seed_events.size(); ++i) {
    out << (i ? ";" : "") << cfg.seed_events[i].time << ':' << cfg.seed_events[i].magnitude;
  }
  out << '\n';
  out << "sim.max_events = " << cfg.max_events << '\n';
  if (cfg.incompleteness) {
    out << "incomplete = G=" << cfg.incompleteness->G << ",H=" << cfg.incompleteness->H << '\n';
    out << "incomplete.all_above = ";
    if (cfg.incompleteness->all_events_above) {
      out << *cfg.incompleteness->all_events_above << '\n';
    } else {
      out << "none\n";
    }
  } else {
    out << "incomplete = off\n";
  }
  out << "replicates = " << cfg.replicates << '\n';
  out << "bench.sizes = ";
  for (std::size_t i = 0; i < cfg.bench_sizes.size(); ++i) out << (i ? "," : "") << cfg.bench_sizes[i];
  out << '\n';
  out << "bench.repeats = " << cfg.bench_repeats << '\n';
  out.precision(old_precision);
}

}  // namespace etas::tools
