#include "etas/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "etas/errors.hpp"

namespace etas {

void SimConfig::validate() const {
  params.validate();
  domain.validate();
  if (!(magnitudes.b_value > 0.0)) throw DomainError("b-value must be positive");
  for (const auto& s : seeds) {
    if (!(s.time >= domain.t1 && s.time <= domain.t2)) throw DomainError("imposed events must lie in [t1, t2]");
    if (!(s.magnitude >= magnitudes.m0) || !std::isfinite(s.magnitude)) {
      throw DomainError("imposed event magnitude must be finite and at least M0");
    }
  }
  if (max_events == 0) throw DomainError("max_events must be positive");
}

std::vector<Event> simulate_background(double mu, const TimeDomain& domain, const MagnitudeModel& magnitudes,
                                       Rng& rng) {
  std::poisson_distribution<long long> count(mu * domain.length());
  const long long n = mu > 0.0 ? count(rng) : 0;
  std::uniform_real_distribution<double> when(domain.t1, domain.t2);
  std::vector<Event> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const double t = when(rng);
    out.push_back({t, gr_magnitude_from_uniform(open_unit(rng), magnitudes), 0});
  }
  return out;
}

double omori_delay_from_uniform(double u, double horizon, double c, double p) {
  const double mass = -std::expm1((1.0 - p) * std::log1p(horizon / c));
  return c * std::expm1(std::log1p(-u * mass) / (1.0 - p));
}

std::vector<Event> simulate_offspring(const Event& parent, const EtasParams& params, const TimeDomain& domain,
                                      const MagnitudeModel& magnitudes, Rng& rng) {
  const double horizon = domain.t2 - parent.time;
  if (!(horizon > 0.0)) return {};
  const double expected = params.K * std::exp(params.alpha * (parent.magnitude - domain.m0)) *
                          omori_integral(0.0, horizon, params.c, params.p);
  if (!std::isfinite(expected)) throw RunawayCascadeError("offspring expectation overflows");
  if (!(expected > 0.0)) return {};
  std::poisson_distribution<long long> count(expected);
  const long long n = count(rng);
  std::vector<Event> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const double tau = omori_delay_from_uniform(open_unit(rng), horizon, params.c, params.p);
    out.push_back({std::min(parent.time + tau, domain.t2), gr_magnitude_from_uniform(open_unit(rng), magnitudes), 0});
  }
  return out;
}

SimulationResult simulate_catalog(const SimConfig& cfg) {
  cfg.validate();
  TimeDomain dom = cfg.domain;
  dom.m0 = cfg.magnitudes.m0;

  Rng bg_rng = substream(cfg.seed, 0);
  std::vector<Event> gen0 = simulate_background(cfg.params.mu, dom, cfg.magnitudes, bg_rng);
  std::vector<char> imposed(gen0.size(), 0);
  for (const auto& s : cfg.seeds) {
    gen0.push_back({s.time, s.magnitude, 0});
    imposed.push_back(1);
  }
  // Order generation 0 by time, keeping the imposed flag attached.
  std::vector<std::size_t> order(gen0.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gen0[a].time < gen0[b].time || (gen0[a].time == gen0[b].time && gen0[a].magnitude > gen0[b].magnitude);
  });

  std::vector<Event> all;
  SimulationResult res;
  if (gen0.size() > cfg.max_events) throw RunawayCascadeError("background alone exceeds the event cap");
  all.reserve(gen0.size());
  for (const auto i : order) {
    const auto id = static_cast<std::int64_t>(all.size());
    all.push_back({gen0[i].time, gen0[i].magnitude, id});
    res.genealogy.push_back({id, -1, 0, imposed[i] != 0});
    if (imposed[i]) res.imposed_ids.push_back(id);
  }

  std::size_t begin = 0;
  std::size_t end = all.size();
  for (int generation = 1; begin < end; ++generation) {
    for (std::size_t i = begin; i < end; ++i) {
      const Event parent = all[i];
      Rng rng = substream(cfg.seed, static_cast<std::uint64_t>(parent.id) + 1);
      auto kids = simulate_offspring(parent, cfg.params, dom, cfg.magnitudes, rng);
      if (all.size() + kids.size() > cfg.max_events) {
        throw RunawayCascadeError("cascade exceeded " + std::to_string(cfg.max_events) + " events in generation " +
                                  std::to_string(generation));
      }
      for (auto& k : kids) {
        k.id = static_cast<std::int64_t>(all.size());
        all.push_back(k);
        res.genealogy.push_back({k.id, parent.id, generation, false});
      }
    }
    begin = end;
    end = all.size();
  }
  res.catalog = Catalog(std::move(all));
  return res;
}

void IncompletenessModel::validate() const {
  if (!std::isfinite(G) || !std::isfinite(H)) throw ConfigError("incompleteness G and H must be finite");
  if (!(H > 0.0)) throw ConfigError("incompleteness H must be positive");
  if (all_events_above && !std::isfinite(*all_events_above)) {
    throw ConfigError("incompleteness magnitude threshold must be finite");
  }
}

Catalog apply_incompleteness(const Catalog& catalog, const IncompletenessModel& model,
                             std::span<const std::int64_t> reference_ids) {
  model.validate();
  std::vector<Event> refs;
  for (const auto id : reference_ids) {
    const auto it = std::find_if(catalog.begin(), catalog.end(), [&](const Event& e) { return e.id == id; });
    if (it == catalog.end()) throw ConfigError("incompleteness reference event " + std::to_string(id) + " is absent");
    refs.push_back(*it);
  }
  if (model.all_events_above) {
    for (const auto& e : catalog) {
      if (e.magnitude >= *model.all_events_above &&
          std::none_of(refs.begin(), refs.end(), [&](const Event& r) { return r.id == e.id; })) {
        refs.push_back(e);
      }
    }
  }
  if (refs.empty()) throw ConfigError("incompleteness needs at least one reference event");

  auto hidden = [&](const Event& e) {
    // Explicit reference events (the imposed mainshocks) are always kept.
    if (std::find(reference_ids.begin(), reference_ids.end(), e.id) != reference_ids.end()) return false;
    for (const auto& r : refs) {
      if (!(e.time > r.time)) continue;
      if (e.magnitude < r.magnitude - model.G - model.H * std::log10(e.time - r.time)) return true;
    }
    return false;
  };
  std::vector<Event> kept;
  kept.reserve(catalog.size());
  for (const auto& e : catalog) {
    if (!hidden(e)) kept.push_back(e);
  }
  return Catalog(std::move(kept), catalog.reference_epoch());
}

nlohmann::json genealogy_to_json(const SimulationResult& sim) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& g : sim.genealogy) {
    rows.push_back({{"id", g.id},
                    {"parent", g.parent_id < 0 ? nlohmann::json(nullptr) : nlohmann::json(g.parent_id)},
                    {"generation", g.generation},
                    {"imposed", g.imposed}});
  }
  return {{"events", rows}, {"imposed_ids", sim.imposed_ids}};
}

}  // namespace etas
