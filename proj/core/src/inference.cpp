#include "etas/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "etas/errors.hpp"

namespace etas {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxNewtonSteps = 200;
constexpr int kLineSearchHalvings = 6;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec5 grad_vec(const Gradient& g) { return Eigen::Map<const Vec5>(g.data()); }

// Linearized posterior pieces at theta: value, gradient and negative Hessian.
struct LocalQuadratic {
  double value{0.0};
  Vec5 gradient{Vec5::Zero()};
  Mat5 neg_hessian{Mat5::Identity()};
};

LocalQuadratic local_quadratic(const Linearization& lin, const Vec5& theta, bool derivatives) {
  const Vec5 d = theta - to_vec(lin.point);
  LocalQuadratic q;
  q.value = log_prior(from_vec(theta));
  if (derivatives) {
    q.gradient = -theta;
    q.neg_hessian.setIdentity();
  }
  for (std::size_t r = 0; r < lin.values.size(); ++r) {
    const Vec5 g = grad_vec(lin.gradients[r]);
    const double f = lin.values[r] + g.dot(d);
    double contrib = 0.0;
    if (lin.counts[r] != 0) {
      contrib += lin.counts[r] * f;
      if (derivatives) q.gradient += lin.counts[r] * g;
    }
    if (lin.exposures[r] != 0.0) {
      const double w = lin.exposures[r] * std::exp(f);
      contrib -= w;
      if (derivatives) {
        q.gradient -= w * g;
        q.neg_hessian.selfadjointView<Eigen::Lower>().rankUpdate(g, w);
      }
    }
    q.value += contrib;
  }
  if (derivatives) {
    const Mat5 full = q.neg_hessian.selfadjointView<Eigen::Lower>();
    q.neg_hessian = full;
  }
  return q;
}

double safe_objective(const Objective& objective, const InternalParams& theta) {
  try {
    const double v = objective(theta);
    return std::isfinite(v) ? v : kNegInf;
  } catch (const NumericError&) {
    return kNegInf;
  } catch (const DomainError&) {
    return kNegInf;
  }
}

}  // namespace

Vec5 to_vec(const InternalParams& theta) { return Eigen::Map<const Vec5>(theta.theta.data()); }

InternalParams from_vec(const Vec5& v) {
  InternalParams out;
  for (std::size_t k = 0; k < kNumParams; ++k) out[k] = v(static_cast<Eigen::Index>(k));
  return out;
}

Mat5 GaussianApprox::covariance() const { return precision.llt().solve(Mat5::Identity()); }

std::array<double, kNumParams> GaussianApprox::sd() const {
  const Mat5 cov = covariance();
  std::array<double, kNumParams> out{};
  for (std::size_t k = 0; k < kNumParams; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out[k] = std::sqrt(cov(i, i));
  }
  return out;
}

double GaussianApprox::log_density(const InternalParams& theta) const {
  const Vec5 d = to_vec(theta) - to_vec(mode);
  return -0.5 * d.dot(precision * d) + 0.5 * log_det_precision -
         0.5 * static_cast<double>(kNumParams) * std::log(2.0 * std::numbers::pi);
}

Linearization linearize(const SurrogateData& data, const InternalParams& point, const PriorSpec& priors) {
  auto ev = data.evaluate(point, priors, true);
  Linearization lin;
  lin.point = point;
  lin.values = std::move(ev.values);
  lin.gradients = std::move(ev.gradients);
  lin.exposures.reserve(data.rows().size());
  lin.counts.reserve(data.rows().size());
  for (const auto& r : data.rows()) {
    lin.exposures.push_back(r.exposure);
    lin.counts.push_back(r.count);
  }
  for (std::size_t r = 0; r < lin.values.size(); ++r) {
    bool ok = std::isfinite(lin.values[r]);
    for (const double g : lin.gradients[r]) ok = ok && std::isfinite(g);
    if (!ok) throw NumericError("linearization produced a non-finite row");
  }
  return lin;
}

double linearized_log_posterior(const InternalParams& theta, const Linearization& lin) {
  return local_quadratic(lin, to_vec(theta), false).value;
}

double linearized_log_posterior(const InternalParams& theta, const InternalParams& lin_point,
                                const SurrogateData& data, const PriorSpec& priors) {
  return linearized_log_posterior(theta, linearize(data, lin_point, priors));
}

double exact_log_posterior(const InternalParams& theta, const SurrogateData& data, const PriorSpec& priors) {
  return data.log_likelihood(theta, priors) + log_prior(theta);
}

LaplaceResult laplace_fit(const Linearization& lin, const InternalParams& start) {
  if (!start.finite()) throw NumericError("laplace_fit: non-finite start");
  Vec5 theta = to_vec(start);
  LocalQuadratic q = local_quadratic(lin, theta, true);
  if (!std::isfinite(q.value)) throw NumericError("laplace_fit: linearized posterior is not finite at the start");

  // Gradient entries are sums of terms as large as the count gradients, so
  // the stopping rule is relative to that scale.
  Vec5 count_grad = Vec5::Zero();
  for (std::size_t r = 0; r < lin.values.size(); ++r) {
    if (lin.counts[r] != 0) count_grad += lin.counts[r] * grad_vec(lin.gradients[r]).cwiseAbs();
  }
  const double scale = std::max(1.0, count_grad.norm());

  LaplaceResult out;
  for (int step = 0; step < kMaxNewtonSteps; ++step) {
    out.gradient_norm = q.gradient.norm();
    if (out.gradient_norm < 1e-8) {
      out.converged = true;
      break;
    }
    Mat5 h = q.neg_hessian;
    Eigen::LLT<Mat5> llt(h);
    for (int k = 0; llt.info() != Eigen::Success && k <= 8; ++k) {
      h = q.neg_hessian + std::pow(10.0, k) * Mat5::Identity();
      llt.compute(h);
    }
    if (llt.info() != Eigen::Success) throw NumericError("laplace_fit: Hessian is not negative definite");
    const Vec5 delta = llt.solve(q.gradient);

    double t = 1.0;
    LocalQuadratic next;
    bool improved = false;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      next = local_quadratic(lin, theta + t * delta, false);
      if (std::isfinite(next.value) && next.value >= q.value) {
        improved = true;
        break;
      }
    }
    ++out.newton_steps;
    if (!improved || (t * delta).norm() <= 1e-15 * (1.0 + theta.norm())) {
      // No further progress is representable.
      out.converged = out.gradient_norm < 1e-8 * scale;
      break;
    }
    theta += t * delta;
    q = local_quadratic(lin, theta, true);
  }
  if (!theta.allFinite()) throw NumericError("laplace_fit: non-finite mode");
  out.gradient_norm = q.gradient.norm();
  out.approx.mode = from_vec(theta);
  out.approx.precision = q.neg_hessian;
  Eigen::LLT<Mat5> llt(q.neg_hessian);
  if (llt.info() != Eigen::Success) throw NumericError("laplace_fit: precision is not positive definite");
  const Mat5 l = llt.matrixL();
  out.approx.log_det_precision = 2.0 * l.diagonal().array().log().sum();
  return out;
}

LineSearchResult line_search(const InternalParams& theta0, double objective0, const InternalParams& target,
                             const Objective& objective, std::optional<double> max_step) {
  const Vec5 start = to_vec(theta0);
  Vec5 d = to_vec(target) - start;
  if (max_step) {
    const double norm = d.norm();
    if (norm > *max_step) d *= *max_step / norm;
  }

  LineSearchResult best{theta0, 0.0, kNegInf, false};
  double s = 1.0;
  for (int k = 0; k <= kLineSearchHalvings; ++k, s *= 0.5) {
    const InternalParams candidate = from_vec(start + s * d);
    const double v = safe_objective(objective, candidate);
    if (v > best.objective) {
      best = {candidate, s, v, false};
    } else if (best.objective > objective0) {
      break;  // past the best ascent fraction
    }
  }
  if (!(best.objective > objective0)) return {theta0, 0.0, objective0, true};
  return best;
}

bool check_convergence(const InternalParams& theta_new, const InternalParams& theta_old,
                       const GaussianApprox& approx, double fraction) {
  const auto sd = approx.sd();
  for (std::size_t k = 0; k < kNumParams; ++k) {
    if (!(std::abs(theta_new[k] - theta_old[k]) < fraction * sd[k])) return false;
  }
  return true;
}

void FitConfig::validate() const {
  priors.validate();
  binning.validate();
  initial.validate();
  if (!priors.contains(initial)) throw DomainError("initial values lie outside the prior support");
  if (max_iter < 1) throw DomainError("max_iter must be at least 1");
  if (!(convergence_fraction > 0.0)) throw DomainError("convergence fraction must be positive");
  if (max_step && !(*max_step > 0.0)) throw DomainError("max_step must be positive");
  if (marginal_points < 3) throw DomainError("marginal grid needs at least 3 points");
  if (!(marginal_half_width > 0.0)) throw DomainError("marginal grid half width must be positive");
}

EtasParams PosteriorResult::mode() const {
  std::array<double, kNumParams> v{};
  for (std::size_t k = 0; k < kNumParams; ++k) v[k] = marginals[k].mode;
  return EtasParams::from_array(v);
}

std::array<Marginal, kNumParams> compute_marginals(const GaussianApprox& approx, const PriorSpec& priors,
                                                   int points, double half_width) {
  const auto sd = approx.sd();
  std::array<Marginal, kNumParams> out;
  for (std::size_t k = 0; k < kNumParams; ++k) {
    const double m = approx.mode[k];
    const double s = sd[k];
    auto& mg = out[k];
    mg.x.resize(static_cast<std::size_t>(points));
    mg.density.resize(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j) {
      const double z = -half_width + 2.0 * half_width * j / (points - 1);
      const auto lv = evaluate_link(m + z * s, priors[k]);
      const double dens = std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * s);
      mg.x[j] = lv.value;
      mg.density[j] = (lv.derivative > 0.0 && std::isfinite(lv.derivative)) ? dens / lv.derivative : 0.0;
    }
    double mass = 0.0;
    double first = 0.0;
    for (std::size_t j = 1; j < mg.x.size(); ++j) {
      const double w = 0.5 * (mg.x[j] - mg.x[j - 1]);
      mass += w * (mg.density[j] + mg.density[j - 1]);
      first += w * (mg.x[j] * mg.density[j] + mg.x[j - 1] * mg.density[j - 1]);
    }
    if (mass > 0.0) {
      for (auto& d : mg.density) d /= mass;
      mg.mean = first / mass;
    }
    mg.mode = forward(m, priors[k]);
    mg.median = mg.mode;
    mg.lower = forward(m - 1.96 * s, priors[k]);
    mg.upper = forward(m + 1.96 * s, priors[k]);
  }
  return out;
}

PosteriorResult fit(const Catalog& modeled, const Catalog& history, const TimeDomain& domain,
                    const FitConfig& cfg) {
  cfg.validate();
  return fit(assemble_surrogate(modeled, history, domain, cfg.binning, cfg.strategy), cfg);
}

PosteriorResult fit(const SurrogateData& data, const FitConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const PriorSpec& priors = cfg.priors;
  const Objective objective = [&](const InternalParams& th) { return exact_log_posterior(th, data, priors); };

  PosteriorResult res;
  res.priors = priors;
  res.domain = data.domain();
  res.n_events = data.n_events();
  res.n_history = static_cast<std::size_t>(std::count_if(
      data.events().begin(), data.events().end(), [&](const Event& e) { return e.time < data.domain().t1; }));

  InternalParams theta = to_internal(cfg.initial, priors);
  double f0 = safe_objective(objective, theta);
  if (!std::isfinite(f0)) throw NumericError("posterior is not finite at the initial values");

  bool converged = false;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const auto t_iter = std::chrono::steady_clock::now();
    const auto lin = linearize(data, theta, priors);
    const auto lap = laplace_fit(lin, theta);
    const auto ls = line_search(theta, f0, lap.approx.mode, objective, cfg.max_step);

    IterationRecord rec;
    rec.iteration = it;
    rec.start = theta;
    rec.laplace_mode = lap.approx.mode;
    rec.accepted = ls.point;
    rec.fraction = ls.fraction;
    rec.objective = ls.objective;
    rec.stalled = ls.stalled;
    rec.seconds = seconds_since(t_iter);
    res.history.push_back(rec);
    res.iterations = it;

    if (ls.stalled) {
      // Nothing along the step improves the exact posterior: either the
      // step is already negligible or the linearization is misleading.
      converged = check_convergence(lap.approx.mode, theta, lap.approx, cfg.convergence_fraction);
      if (!converged) res.diagnostic = "line search stalled at iteration " + std::to_string(it);
      break;
    }
    converged = check_convergence(ls.point, theta, lap.approx, cfg.convergence_fraction);
    theta = ls.point;
    f0 = ls.objective;
    if (converged && !cfg.max_step) break;
  }
  if (!converged && res.diagnostic.empty()) res.diagnostic = "no convergence within max_iter";

  const auto lin = linearize(data, theta, priors);
  const auto lap = laplace_fit(lin, theta);
  res.approx = lap.approx;
  res.converged = converged;
  res.marginals = compute_marginals(res.approx, priors, cfg.marginal_points, cfg.marginal_half_width);
  if (cfg.n_samples > 0) {
    Rng rng = substream(cfg.sample_seed, 0);
    res.samples = sample_posterior(res, cfg.n_samples, rng);
  }
  res.seconds = seconds_since(t_start);
  return res;
}

std::vector<InternalParams> sample_internal(const GaussianApprox& approx, std::size_t n, Rng& rng) {
  const Mat5 cov = approx.covariance();
  Eigen::LLT<Mat5> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError("posterior covariance is not positive definite");
  const Mat5 l = llt.matrixL();
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec5 m = to_vec(approx.mode);
  std::vector<InternalParams> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec5 z;
    for (auto& v : z) v = gauss(rng);
    out.push_back(from_vec(m + l * z));
  }
  return out;
}

std::vector<EtasParams> sample_posterior(const PosteriorResult& result, std::size_t n, Rng& rng) {
  std::vector<EtasParams> out;
  out.reserve(n);
  for (const auto& th : sample_internal(result.approx, n, rng)) out.push_back(to_etas(th, result.priors));
  return out;
}

ImportanceResult importance_reweight(const PosteriorResult& result, const SurrogateData& data, std::size_t n,
                                     Rng& rng) {
  const auto draws = sample_internal(result.approx, n, rng);
  std::vector<double> logw(n);
  double max_logw = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    double lp = kNegInf;
    try {
      lp = exact_log_posterior(draws[i], data, result.priors);
    } catch (const NumericError&) {
    }
    logw[i] = std::isfinite(lp) ? lp - result.approx.log_density(draws[i]) : kNegInf;
    max_logw = std::max(max_logw, logw[i]);
  }
  if (!std::isfinite(max_logw)) throw NumericError("importance_reweight: every draw has zero weight");

  ImportanceResult out;
  out.weights.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += out.weights[i] = std::exp(logw[i] - max_logw);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.weights[i] /= total;
    sum_sq += out.weights[i] * out.weights[i];
    out.samples.push_back(to_etas(draws[i], result.priors));
    const auto v = out.samples.back().to_array();
    for (std::size_t k = 0; k < kNumParams; ++k) out.mean[k] += out.weights[i] * v[k];
  }
  out.ess = 1.0 / sum_sq;
  return out;
}

}  // namespace etas
