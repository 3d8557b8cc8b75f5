#include <gtest/gtest.h>

#include "etas/errors.hpp"
#include "etas/inference.hpp"
#include "etas/simulator.hpp"
#include "support.hpp"

using namespace etas;
using namespace etas::testing;

namespace {

struct Fixture {
  TimeDomain domain{0.0, 1000.0, 2.5};
  Catalog catalog;
};

const Fixture& small_fixture() {
  static const Fixture f = [] {
    Fixture out;
    SimConfig sc;
    sc.domain = out.domain;
    sc.seed = 5;
    out.catalog = simulate_catalog(sc).catalog;
    return out;
  }();
  return f;
}

}  // namespace

TEST(Inference, LinearizedPosteriorIsExactAtTheLinearizationPoint) {
  Rng rng = substream(41, 0);
  const PriorSpec priors;
  const auto& f = small_fixture();
  const SurrogateData data = assemble_surrogate(f.catalog, Catalog{}, f.domain);
  for (int i = 0; i < 10; ++i) {
    const InternalParams th = random_internal(rng, 0.8);
    const Linearization lin = linearize(data, th, priors);
    EXPECT_LT(rel_diff(linearized_log_posterior(th, lin), exact_log_posterior(th, data, priors)), 1e-10);
    // first order agreement as well
    for (std::size_t k = 0; k < kNumParams; ++k) {
      InternalParams up = th;
      InternalParams dn = th;
      up[k] += 1e-5;
      dn[k] -= 1e-5;
      const double g_lin = (linearized_log_posterior(up, lin) - linearized_log_posterior(dn, lin)) / 2e-5;
      const double g_ex = (exact_log_posterior(up, data, priors) - exact_log_posterior(dn, data, priors)) / 2e-5;
      EXPECT_NEAR(g_lin, g_ex, 1e-4 * std::max(1.0, std::abs(g_ex)));
    }
  }
}

TEST(Inference, LaplaceFitFindsStationaryPointWithPositiveDefinitePrecision) {
  const PriorSpec priors;
  const auto& f = small_fixture();
  const SurrogateData data = assemble_surrogate(f.catalog, Catalog{}, f.domain);
  const InternalParams th = to_internal(EtasParams{0.3, 0.1, 1.0, 0.2, 1.1}, priors);
  const Linearization lin = linearize(data, th, priors);
  const LaplaceResult r = laplace_fit(lin, th);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.gradient_norm, 1e-6);
  const Eigen::SelfAdjointEigenSolver<Mat5> eig(r.approx.precision);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  EXPECT_LT((r.approx.precision - r.approx.precision.transpose()).norm(), 1e-9);
  // the linearized objective is maximal at the mode along each axis
  const double top = linearized_log_posterior(r.approx.mode, lin);
  for (std::size_t k = 0; k < kNumParams; ++k) {
    InternalParams off = r.approx.mode;
    off[k] += 0.01;
    EXPECT_LT(linearized_log_posterior(off, lin), top);
  }
}

TEST(Inference, ConvergenceCheck) {
  GaussianApprox g;
  g.precision = Mat5::Identity() * 4.0;  // sd 0.5
  InternalParams a;
  a.theta = {0.1, -0.2, 0.3, 0.0, 1.0};
  EXPECT_TRUE(check_convergence(a, a, g, 0.01));
  InternalParams b = a;
  b[kAlpha] += 0.02 * 0.5;
  EXPECT_FALSE(check_convergence(b, a, g, 0.01));
  b[kAlpha] = a[kAlpha] + 0.004;
  EXPECT_TRUE(check_convergence(b, a, g, 0.01));
}

TEST(Inference, LineSearchPicksTheBestGridFraction) {
  InternalParams zero;
  InternalParams target;
  target.theta = {1.0, 0.0, 0.0, 0.0, 0.0};
  // maximum at x = 0.3: fractions 1/4 and 1/2 bracket it, 1/4 is closer
  auto obj = [](const InternalParams& t) { return -(t[0] - 0.3) * (t[0] - 0.3); };
  const auto r = line_search(zero, obj(zero), target, obj);
  EXPECT_FALSE(r.stalled);
  EXPECT_DOUBLE_EQ(r.fraction, 0.25);
  EXPECT_DOUBLE_EQ(r.point[0], 0.25);
  // full step when it is best
  auto up = [](const InternalParams& t) { return t[0]; };
  EXPECT_DOUBLE_EQ(line_search(zero, 0.0, target, up).fraction, 1.0);
  // nothing improves: stay put
  auto down = [](const InternalParams& t) { return -t[0]; };
  const auto s = line_search(zero, 0.0, target, down);
  EXPECT_TRUE(s.stalled);
  EXPECT_DOUBLE_EQ(s.point[0], 0.0);
  // max_step caps the displacement
  InternalParams far;
  far.theta = {10.0, 0.0, 0.0, 0.0, 0.0};
  const auto capped = line_search(zero, 0.0, far, up, 0.5);
  EXPECT_LE(capped.point[0], 0.5 + 1e-12);
}

TEST(Inference, MarginalsAreNormalizedAndOrdered) {
  GaussianApprox g;
  g.precision = Mat5::Identity() * 25.0;
  g.mode.theta = {0.2, -0.1, 0.0, 0.3, -0.4};
  const PriorSpec priors;
  const auto m = compute_marginals(g, priors, 401, 6.0);
  for (std::size_t k = 0; k < kNumParams; ++k) {
    ASSERT_EQ(m[k].x.size(), 401u);
    double mass = 0.0;
    for (std::size_t i = 1; i < m[k].x.size(); ++i) {
      EXPECT_GT(m[k].x[i], m[k].x[i - 1]);
      mass += 0.5 * (m[k].density[i] + m[k].density[i - 1]) * (m[k].x[i] - m[k].x[i - 1]);
    }
    EXPECT_NEAR(mass, 1.0, 1e-9);
    EXPECT_NEAR(m[k].median, forward(g.mode[k], priors[k]), 1e-12);
    EXPECT_NEAR(m[k].lower, forward(g.mode[k] - 1.96 * 0.2, priors[k]), 1e-12);
    EXPECT_LT(m[k].lower, m[k].mode);
    EXPECT_LT(m[k].mode, m[k].upper);
  }
}

TEST(Inference, FitConvergesWithMonotoneObjective) {
  const auto& f = small_fixture();
  FitConfig cfg;
  cfg.n_samples = 50;
  const PosteriorResult r = fit(f.catalog, Catalog{}, f.domain, cfg);
  EXPECT_TRUE(r.converged) << r.diagnostic;
  EXPECT_LE(r.iterations, cfg.max_iter);
  EXPECT_EQ(r.n_events, f.catalog.size());
  ASSERT_EQ(static_cast<int>(r.history.size()), r.iterations);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    EXPECT_GE(r.history[i].objective, r.history[i - 1].objective - 1e-9);
  }
  const Eigen::SelfAdjointEigenSolver<Mat5> eig(r.approx.precision);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  EXPECT_EQ(r.samples.size(), 50u);
  for (const auto& s : r.samples) EXPECT_TRUE(cfg.priors.contains(s));
  // the truth used by the simulator is within reach
  EXPECT_LT(r.marginals[kMu].lower, 0.1);
  EXPECT_GT(r.marginals[kMu].upper, 0.1);
}

TEST(Inference, FitIsDeterministic) {
  const auto& f = small_fixture();
  FitConfig cfg;
  cfg.n_samples = 5;
  const auto a = fit(f.catalog, Catalog{}, f.domain, cfg);
  const auto b = fit(f.catalog, Catalog{}, f.domain, cfg);
  for (std::size_t k = 0; k < kNumParams; ++k) EXPECT_EQ(a.approx.mode[k], b.approx.mode[k]);
  EXPECT_EQ(a.samples[4].K, b.samples[4].K);
}

TEST(Inference, MaxStepRunsExactlyMaxIter) {
  const auto& f = small_fixture();
  FitConfig cfg;
  cfg.max_iter = 7;
  cfg.max_step = 0.5;
  const auto r = fit(f.catalog, Catalog{}, f.domain, cfg);
  EXPECT_EQ(r.iterations, 7);
}

TEST(Inference, InitialOutsideSupportIsRejected) {
  FitConfig cfg;
  cfg.initial.p = 2.5;
  EXPECT_THROW(cfg.validate(), DomainError);
  const auto& f = small_fixture();
  EXPECT_THROW((void)fit(f.catalog, Catalog{}, f.domain, cfg), DomainError);
}

TEST(Inference, ImportanceWeightsAreNormalized) {
  const auto& f = small_fixture();
  const FitConfig cfg;
  const SurrogateData data = assemble_surrogate(f.catalog, Catalog{}, f.domain);
  const auto r = fit(data, cfg);
  Rng rng = substream(9, 9);
  const auto imp = importance_reweight(r, data, 400, rng);
  double s = 0.0;
  for (const double w : imp.weights) s += w;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_GE(imp.ess, 1.0);
  EXPECT_LE(imp.ess, 400.0 + 1e-9);
  EXPECT_EQ(imp.samples.size(), 400u);
  for (const auto& s : imp.samples) EXPECT_TRUE(cfg.priors.contains(s));
}
