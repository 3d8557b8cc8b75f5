#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "etas/errors.hpp"
#include "etas/model.hpp"
#include "support.hpp"

using namespace etas;
using namespace etas::testing;

TEST(Model, OmoriIntegralMatchesQuadrature) {
  Rng rng = substream(42, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double c = 0.005 + u(rng);
    const double p = 1.0005 + u(rng);
    const double a = 10.0 * u(rng) * u(rng);
    const double b = a + 1e-6 + 50.0 * u(rng);
    auto f = [&](double x) { return std::exp(x) * std::pow(std::exp(x) / c, -p); };
    // integrand in log(s + c) coordinates
    const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, std::log(a + c),
                                                                                    std::log(b + c), 12, 1e-13);
    EXPECT_LT(rel_diff(omori_integral(a, b, c, p), ref), 1e-11) << "c=" << c << " p=" << p;
  }
}

TEST(Model, OmoriIntegralToInfinityIsClosedForm) {
  EXPECT_NEAR(omori_integral(0.0, std::numeric_limits<double>::infinity(), 0.11, 1.08), 0.11 / 0.08, 1e-12);
  EXPECT_THROW((void)omori_integral(0.0, 1.0, 0.1, 1.0), DomainError);
}

TEST(Model, TriggeredCountIsKernelIntegral) {
  const EtasParams p{0.1, 0.089, 2.29, 0.11, 1.08};
  const Event parent{10.0, 4.0, 0};
  const TimeDomain d{0.0, 100.0, 2.5};
  const double expect = p.K * std::exp(p.alpha * 1.5) * omori_integral(0.0, 90.0, p.c, p.p);
  EXPECT_NEAR(triggered_count(parent, d, p) / expect, 1.0, 1e-14);
  // A parent before T1 only contributes over the domain.
  const Event early{-5.0, 4.0, 1};
  EXPECT_NEAR(triggered_count(early, d, p) / (p.K * std::exp(p.alpha * 1.5) * omori_integral(5.0, 105.0, p.c, p.p)),
              1.0, 1e-14);
}

TEST(Model, ConditionalIntensityRequiresStrictHistory) {
  const EtasParams p;
  std::vector<Event> h{{1.0, 3.0, 0}};
  EXPECT_GT(conditional_intensity(2.0, h, p, 2.5), p.mu);
  EXPECT_THROW((void)conditional_intensity(1.0, h, p, 2.5), DomainError);
  EXPECT_DOUBLE_EQ(conditional_intensity(2.0, {}, p, 2.5), p.mu);
}

TEST(Model, LogLikelihoodMatchesNaiveOracle) {
  Rng rng = substream(7, 1);
  for (int i = 0; i < 25; ++i) {
    const EtasParams p = random_params(rng);
    const TimeDomain d{10.0, 60.0, 2.5};
    auto ev = random_events(30, 10.0, 60.0, 2.5, rng);
    auto hist = random_events(5, 0.0, 9.9, 2.5, rng, 100);
    const Catalog modeled(ev);
    const Catalog history(hist);
    const double ll = exact_log_likelihood(d, modeled, history, p);
    EXPECT_LT(rel_diff(ll, naive_log_likelihood(modeled, history, d, p)), 1e-8) << i;
  }
}

TEST(Model, LogLikelihoodOfEmptyCatalogIsMinusBackground) {
  const EtasParams p{0.2, 0.1, 1.0, 0.1, 1.2};
  const TimeDomain d{0.0, 50.0, 2.5};
  EXPECT_DOUBLE_EQ(exact_log_likelihood(d, Catalog{}, Catalog{}, p), -10.0);
}

TEST(Model, LogLikelihoodZeroIntensityThrows) {
  const EtasParams p{0.0, 0.1, 1.0, 0.1, 1.2};
  const TimeDomain d{0.0, 50.0, 2.5};
  EXPECT_THROW((void)exact_log_likelihood(d, Catalog({{1.0, 3.0, 0}}), Catalog{}, p), NumericError);
}

TEST(Model, GutenbergRichter) {
  const MagnitudeModel gr{1.0, 2.5};
  EXPECT_NEAR(gr_log_density(3.5, gr), std::log(std::log(10.0)) - std::log(10.0), 1e-14);
  EXPECT_THROW((void)gr_log_density(2.5, gr), DomainError);
  EXPECT_NEAR(gr_magnitude_from_uniform(0.1, gr), 3.5, 1e-12);  // P(M > 3.5) = 0.1
  Rng rng = substream(3, 3);
  for (const double m : gr_sample(1000, gr, rng)) EXPECT_GT(m, 2.5);
}

TEST(Model, ParamsValidate) {
  EXPECT_NO_THROW(EtasParams{}.validate());
  EXPECT_THROW((EtasParams{0.1, 0.1, 1.0, 0.1, 1.0}).validate(), DomainError);
  EXPECT_THROW((EtasParams{-0.1, 0.1, 1.0, 0.1, 1.1}).validate(), DomainError);
}
