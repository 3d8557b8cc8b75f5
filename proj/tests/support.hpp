#pragma once

// Shared oracles and generators for the test binaries.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "etas/catalog.hpp"
#include "etas/model.hpp"
#include "etas/prior.hpp"
#include "etas/random.hpp"

namespace etas::testing {

// lambda(t) summed term by term, history = every event strictly before t.
inline double naive_intensity(double t, const std::vector<Event>& all, const EtasParams& p, double m0) {
  double s = p.mu;
  for (const auto& e : all) {
    if (e.time < t) s += p.K * std::exp(p.alpha * (e.magnitude - m0)) * std::pow((t - e.time) / p.c + 1.0, -p.p);
  }
  return s;
}

// Integral of lambda over [t1, t2] by adaptive Gauss-Kronrod on each
// inter-event interval, substituting u = log(s + c) so the Omori spike of
// the latest event is smooth in u.
inline double quadrature_integral(const std::vector<Event>& all, const EtasParams& p, const TimeDomain& d) {
  std::vector<double> cuts{d.t1, d.t2};
  for (const auto& e : all) {
    if (e.time > d.t1 && e.time < d.t2) cuts.push_back(e.time);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    auto f = [&](double u) {
      const double s = std::exp(u) - p.c;
      return naive_intensity(a + std::max(s, 0.0), all, p, d.m0) * std::exp(u);
    };
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, std::log(p.c), std::log(b - a + p.c),
                                                                          12, 1e-12);
  }
  return total;
}

// Double loop over modeled events plus quadrature for the compensator.
inline double naive_log_likelihood(const Catalog& modeled, const Catalog& history, const TimeDomain& d,
                                   const EtasParams& p) {
  std::vector<Event> all(history.begin(), history.end());
  all.insert(all.end(), modeled.begin(), modeled.end());
  double ll = -quadrature_integral(all, p, d);
  for (const auto& e : modeled) ll += std::log(naive_intensity(e.time, all, p, d.m0));
  return ll;
}

inline EtasParams random_params(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {0.05 + 0.5 * u(rng), 0.01 + 0.2 * u(rng), 0.5 + 2.0 * u(rng), 0.01 + 0.5 * u(rng), 1.02 + 0.6 * u(rng)};
}

// Uniform times on [lo, hi], GR(b=1) magnitudes above m0.
inline std::vector<Event> random_events(std::size_t n, double lo, double hi, double m0, Rng& rng,
                                        std::int64_t first_id = 0) {
  std::uniform_real_distribution<double> t(lo, hi);
  std::vector<Event> ev;
  for (std::size_t i = 0; i < n; ++i) {
    ev.push_back({t(rng), gr_magnitude_from_uniform(open_unit(rng), {1.0, m0}), first_id + static_cast<std::int64_t>(i)});
  }
  return ev;
}

// Two-sided one-sample Kolmogorov-Smirnov p-value (asymptotic series with
// Stephens' small-sample correction). `cdf` is the hypothesised law.
template <class Cdf>
double ks_pvalue(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double t = d * (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
  if (t < 0.2) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
  return std::clamp(p, 0.0, 1.0);
}

inline double normal_cdf_for_test(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline InternalParams random_internal(Rng& rng, double spread = 1.5) {
  std::normal_distribution<double> z(0.0, spread);
  InternalParams th;
  for (auto& v : th.theta) v = z(rng);
  return th;
}

}  // namespace etas::testing
