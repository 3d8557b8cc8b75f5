#include "etas/serialize.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "etas/errors.hpp"

namespace etas {

using nlohmann::json;

namespace {

json internal_to_json(const InternalParams& th) { return json(th.theta); }

InternalParams internal_from_json(const json& j) {
  InternalParams th;
  th.theta = j.get<std::array<double, kNumParams>>();
  return th;
}

std::string family_name(PriorFamily f) {
  switch (f) {
    case PriorFamily::Gamma:
      return "gamma";
    case PriorFamily::LogNormal:
      return "lognormal";
    case PriorFamily::Uniform:
      return "uniform";
  }
  return "uniform";
}

PriorFamily family_from_name(const std::string& s) {
  if (s == "gamma") return PriorFamily::Gamma;
  if (s == "lognormal") return PriorFamily::LogNormal;
  if (s == "uniform") return PriorFamily::Uniform;
  throw ConfigError("unknown prior family '" + s + "'");
}

}  // namespace

json params_to_json(const EtasParams& p) {
  return {{"mu", p.mu}, {"K", p.K}, {"alpha", p.alpha}, {"c", p.c}, {"p", p.p}};
}

EtasParams params_from_json(const json& j) {
  return {j.at("mu").get<double>(), j.at("K").get<double>(), j.at("alpha").get<double>(), j.at("c").get<double>(),
          j.at("p").get<double>()};
}

json priors_to_json(const PriorSpec& priors) {
  json out = json::object();
  for (std::size_t k = 0; k < kNumParams; ++k) {
    out[std::string(kParamNames[k])] = {{"family", family_name(priors[k].family)}, {"a", priors[k].a},
                                        {"b", priors[k].b}};
  }
  return out;
}

PriorSpec priors_from_json(const json& j) {
  PriorSpec out;
  for (std::size_t k = 0; k < kNumParams; ++k) {
    const auto& d = j.at(std::string(kParamNames[k]));
    out[k] = {family_from_name(d.at("family").get<std::string>()), d.at("a").get<double>(), d.at("b").get<double>()};
  }
  out.validate();
  return out;
}

json posterior_to_json(const PosteriorResult& r) {
  json j;
  j["converged"] = r.converged;
  j["diagnostic"] = r.diagnostic;
  j["iterations"] = r.iterations;
  j["seconds"] = r.seconds;
  j["n_events"] = r.n_events;
  j["n_history"] = r.n_history;
  j["domain"] = {{"t1", r.domain.t1}, {"t2", r.domain.t2}, {"m0", r.domain.m0}};
  j["priors"] = priors_to_json(r.priors);
  j["mode"] = params_to_json(r.mode());
  j["internal_mode"] = internal_to_json(r.approx.mode);
  json prec = json::array();
  json cov = json::array();
  const Mat5 c = r.approx.covariance();
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(kNumParams); ++a) {
    json prow = json::array();
    json crow = json::array();
    for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(kNumParams); ++b) {
      prow.push_back(r.approx.precision(a, b));
      crow.push_back(c(a, b));
    }
    prec.push_back(prow);
    cov.push_back(crow);
  }
  j["precision"] = prec;
  j["covariance"] = cov;
  j["log_det_precision"] = r.approx.log_det_precision;

  json marg = json::object();
  for (std::size_t k = 0; k < kNumParams; ++k) {
    const auto& m = r.marginals[k];
    marg[std::string(kParamNames[k])] = {{"mode", m.mode}, {"mean", m.mean},   {"median", m.median},
                                         {"lower", m.lower}, {"upper", m.upper}, {"x", m.x},
                                         {"density", m.density}};
  }
  j["marginals"] = marg;

  json trace = json::array();
  for (const auto& it : r.history) {
    trace.push_back({{"iteration", it.iteration},
                     {"start", internal_to_json(it.start)},
                     {"laplace_mode", internal_to_json(it.laplace_mode)},
                     {"accepted", internal_to_json(it.accepted)},
                     {"fraction", it.fraction},
                     {"objective", it.objective},
                     {"stalled", it.stalled},
                     {"seconds", it.seconds}});
  }
  j["trace"] = trace;

  json samples = json::array();
  for (const auto& s : r.samples) samples.push_back(params_to_json(s));
  j["samples"] = samples;
  return j;
}

PosteriorResult posterior_from_json(const json& j) {
  PosteriorResult r;
  try {
    r.converged = j.at("converged").get<bool>();
    r.diagnostic = j.value("diagnostic", std::string{});
    r.iterations = j.at("iterations").get<int>();
    r.seconds = j.value("seconds", 0.0);
    r.n_events = j.value("n_events", std::size_t{0});
    r.n_history = j.value("n_history", std::size_t{0});
    if (j.contains("domain")) {
      r.domain = {j["domain"].at("t1").get<double>(), j["domain"].at("t2").get<double>(),
                  j["domain"].at("m0").get<double>()};
    }
    r.priors = priors_from_json(j.at("priors"));
    r.approx.mode = internal_from_json(j.at("internal_mode"));
    const auto& prec = j.at("precision");
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(kNumParams); ++a) {
      for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(kNumParams); ++b) {
        r.approx.precision(a, b) = prec.at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(b)).get<double>();
      }
    }
    r.approx.log_det_precision = j.at("log_det_precision").get<double>();
    for (std::size_t k = 0; k < kNumParams; ++k) {
      const auto& m = j.at("marginals").at(std::string(kParamNames[k]));
      auto& out = r.marginals[k];
      out.mode = m.at("mode").get<double>();
      out.mean = m.at("mean").get<double>();
      out.median = m.at("median").get<double>();
      out.lower = m.at("lower").get<double>();
      out.upper = m.at("upper").get<double>();
      out.x = m.at("x").get<std::vector<double>>();
      out.density = m.at("density").get<std::vector<double>>();
    }
    for (const auto& it : j.value("trace", json::array())) {
      IterationRecord rec;
      rec.iteration = it.at("iteration").get<int>();
      rec.start = internal_from_json(it.at("start"));
      rec.laplace_mode = internal_from_json(it.at("laplace_mode"));
      rec.accepted = internal_from_json(it.at("accepted"));
      rec.fraction = it.at("fraction").get<double>();
      rec.objective = it.at("objective").get<double>();
      rec.stalled = it.at("stalled").get<bool>();
      rec.seconds = it.value("seconds", 0.0);
      r.history.push_back(rec);
    }
    for (const auto& s : j.value("samples", json::array())) r.samples.push_back(params_from_json(s));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed posterior file: ") + e.what());
  }
  return r;
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace etas
