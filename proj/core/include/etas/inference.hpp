#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "etas/binning.hpp"
#include "etas/catalog.hpp"
#include "etas/intensity_sum.hpp"
#include "etas/prior.hpp"
#include "etas/random.hpp"
#include "etas/surrogate.hpp"

namespace etas {

using Vec5 = Eigen::Matrix<double, kNumParams, 1>;
using Mat5 = Eigen::Matrix<double, kNumParams, kNumParams>;

[[nodiscard]] Vec5 to_vec(const InternalParams& theta);
[[nodiscard]] InternalParams from_vec(const Vec5& v);

/// Gaussian approximation N(mode, precision^-1) on the internal scale.
struct GaussianApprox {
  InternalParams mode;
  Mat5 precision{Mat5::Identity()};
  double log_det_precision{0.0};

  [[nodiscard]] Mat5 covariance() const;
  [[nodiscard]] std::array<double, kNumParams> sd() const;
  [[nodiscard]] double log_density(const InternalParams& theta) const;
};

/// Row values and gradients frozen at a linearization point.
struct Linearization {
  InternalParams point;
  std::vector<double> values;
  std::vector<Gradient> gradients;
  std::vector<double> exposures;
  std::vector<int> counts;
};

[[nodiscard]] Linearization linearize(const SurrogateData& data, const InternalParams& point,
                                      const PriorSpec& priors);

/// Log posterior with every row replaced by its first-order Taylor
/// expansion about the linearization point.
[[nodiscard]] double linearized_log_posterior(const InternalParams& theta, const Linearization& lin);
[[nodiscard]] double linearized_log_posterior(const InternalParams& theta, const InternalParams& lin_point,
                                              const SurrogateData& data, const PriorSpec& priors);

/// Exact (unlinearized) log posterior: log-likelihood plus standard normal prior.
[[nodiscard]] double exact_log_posterior(const InternalParams& theta, const SurrogateData& data,
                                         const PriorSpec& priors);

struct LaplaceResult {
  GaussianApprox approx;
  int newton_steps{0};
  bool converged{false};
  double gradient_norm{0.0};
};

/// Newton maximization of the linearized posterior from `start`, followed
/// by the Hessian at the mode. Throws NumericError if no finite mode exists.
[[nodiscard]] LaplaceResult laplace_fit(const Linearization& lin, const InternalParams& start);

struct LineSearchResult {
  InternalParams point;
  double fraction{0.0};
  double objective{0.0};
  bool stalled{false};
};

using Objective = std::function<double(const InternalParams&)>;

/// Picks theta0 + s (target - theta0), s in {1, 1/2, ..., 1/64}, maximizing
/// `objective`. With max_step the displacement norm is capped first. If no
/// candidate beats `objective0` the result is theta0 flagged as stalled.
[[nodiscard]] LineSearchResult line_search(const InternalParams& theta0, double objective0,
                                           const InternalParams& target, const Objective& objective,
                                           std::optional<double> max_step = std::nullopt);

/// True when every |theta_new_k - theta_old_k| < fraction * sd_k.
[[nodiscard]] bool check_convergence(const InternalParams& theta_new, const InternalParams& theta_old,
                                     const GaussianApprox& approx, double fraction);

struct FitConfig {
  EtasParams initial{0.3, 0.1, 1.0, 0.2, 1.1};
  int max_iter{100};
  double convergence_fraction{0.01};
  std::optional<double> max_step;  // caps each step; disables the convergence test
  BinningConfig binning;
  PriorSpec priors;
  IntensityStrategy strategy{IntensityStrategy::Auto};
  int marginal_points{401};
  double marginal_half_width{6.0};  // grid spans mode +- this many sd
  std::size_t n_samples{0};
  std::uint64_t sample_seed{1};

  void validate() const;
};

struct IterationRecord {
  int iteration{0};
  InternalParams start;
  InternalParams laplace_mode;
  InternalParams accepted;
  double fraction{0.0};
  double objective{0.0};
  bool stalled{false};
  double seconds{0.0};
};

struct Marginal {
  std::vector<double> x;        // ETAS scale
  std::vector<double> density;  // normalized on x
  double mode{0.0};             // transformed internal mode
  double mean{0.0};
  double median{0.0};
  double lower{0.0};  // 2.5%
  double upper{0.0};  // 97.5%
};

struct PosteriorResult {
  GaussianApprox approx;
  std::array<Marginal, kNumParams> marginals;
  std::vector<EtasParams> samples;
  PriorSpec priors;
  int iterations{0};
  bool converged{false};
  std::string diagnostic;
  std::vector<IterationRecord> history;
  double seconds{0.0};
  std::size_t n_events{0};
  std::size_t n_history{0};
  TimeDomain domain;

  [[nodiscard]] EtasParams mode() const;
};

/// Builds marginals from the Gaussian approximation pushed through the links.
[[nodiscard]] std::array<Marginal, kNumParams> compute_marginals(const GaussianApprox& approx,
                                                                 const PriorSpec& priors, int points,
                                                                 double half_width);

/// Iterated linearization: repeated Laplace fits of the linearized posterior
/// with a line search on the exact posterior. Throws DomainError for
/// initial values outside the prior support; NumericError if the linearized
/// problem fails.
[[nodiscard]] PosteriorResult fit(const Catalog& modeled, const Catalog& history, const TimeDomain& domain,
                                  const FitConfig& cfg);
[[nodiscard]] PosteriorResult fit(const SurrogateData& data, const FitConfig& cfg);

[[nodiscard]] std::vector<InternalParams> sample_internal(const GaussianApprox& approx, std::size_t n, Rng& rng);
[[nodiscard]] std::vector<EtasParams> sample_posterior(const PosteriorResult& result, std::size_t n, Rng& rng);

struct ImportanceResult {
  std::vector<EtasParams> samples;
  std::vector<double> weights;  // normalized
  double ess{0.0};
  std::array<double, kNumParams> mean{};
};

/// Reweights draws from the Gaussian approximation towards the exact posterior.
[[nodiscard]] ImportanceResult importance_reweight(const PosteriorResult& result, const SurrogateData& data,
                                                   std::size_t n, Rng& rng);

}  // namespace etas
