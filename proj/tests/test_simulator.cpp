#include <gtest/gtest.h>

#include "etas/errors.hpp"
#include "etas/simulator.hpp"
#include "support.hpp"

using namespace etas;
using namespace etas::testing;

TEST(Simulator, OmoriDelayInvertsTheTruncatedCdf) {
  for (const double p : {1.01, 1.08, 1.5, 1.99}) {
    for (const double horizon : {0.5, 100.0, 1e5}) {
      for (const double u : {1e-9, 0.1, 0.5, 0.9, 1.0 - 1e-9}) {
        const double tau = omori_delay_from_uniform(u, horizon, 0.11, p);
        EXPECT_GT(tau, 0.0);
        EXPECT_LE(tau, horizon);
        EXPECT_NEAR(omori_integral(0.0, tau, 0.11, p) / omori_integral(0.0, horizon, 0.11, p), u, 1e-9);
      }
    }
  }
}

TEST(Simulator, DeterministicGivenSeed) {
  SimConfig sc;
  sc.seed = 17;
  sc.seeds = {{500.0, 6.0, 0}};
  const auto a = simulate_catalog(sc);
  const auto b = simulate_catalog(sc);
  ASSERT_EQ(a.catalog.size(), b.catalog.size());
  for (std::size_t i = 0; i < a.catalog.size(); ++i) {
    EXPECT_EQ(a.catalog[i].time, b.catalog[i].time);
    EXPECT_EQ(a.catalog[i].magnitude, b.catalog[i].magnitude);
  }
  sc.seed = 18;
  const auto c = simulate_catalog(sc);
  EXPECT_TRUE(c.catalog.size() != a.catalog.size() || c.catalog[0].time != a.catalog[0].time);
}

TEST(Simulator, GenealogyIsConsistent) {
  SimConfig sc;
  sc.seed = 3;
  sc.seeds = {{200.0, 6.5, 0}};
  const auto sim = simulate_catalog(sc);
  ASSERT_EQ(sim.genealogy.size(), sim.catalog.size());
  ASSERT_EQ(sim.imposed_ids.size(), 1u);
  std::vector<double> time_of(sim.catalog.size());
  for (const auto& e : sim.catalog) time_of[static_cast<std::size_t>(e.id)] = e.time;
  for (const auto& e : sim.catalog) {
    EXPECT_GE(e.time, sc.domain.t1);
    EXPECT_LE(e.time, sc.domain.t2);
    EXPECT_GE(e.magnitude, sc.domain.m0);
  }
  for (const auto& g : sim.genealogy) {
    if (g.parent_id >= 0) {
      const auto& parent = sim.genealogy[static_cast<std::size_t>(g.parent_id)];
      EXPECT_EQ(g.generation, parent.generation + 1);
      EXPECT_LT(time_of[static_cast<std::size_t>(g.parent_id)], time_of[static_cast<std::size_t>(g.id)]);
    } else {
      EXPECT_EQ(g.generation, 0);
    }
  }
  EXPECT_TRUE(sim.genealogy[static_cast<std::size_t>(sim.imposed_ids[0])].imposed);
}

TEST(Simulator, BackgroundCountIsPoisson) {
  Rng rng = substream(51, 0);
  const TimeDomain d{0.0, 100.0, 2.5};
  double sum = 0.0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    const auto ev = simulate_background(0.5, d, {1.0, 2.5}, rng);
    sum += static_cast<double>(ev.size());
    for (const auto& e : ev) EXPECT_TRUE(e.time >= d.t1 && e.time <= d.t2);
  }
  EXPECT_NEAR(sum / reps, 50.0, 4.0 * std::sqrt(50.0 / reps));
}

TEST(Simulator, RunawayCascadeIsCapped) {
  SimConfig sc;
  sc.params = {0.1, 2.0, 2.29, 0.11, 1.08};  // strongly supercritical
  sc.max_events = 5000;
  EXPECT_THROW((void)simulate_catalog(sc), RunawayCascadeError);
}

TEST(Simulator, ConfigValidation) {
  SimConfig sc;
  sc.seeds = {{2000.0, 6.0, 0}};
  EXPECT_THROW(sc.validate(), DomainError);
  sc.seeds = {{100.0, 2.0, 0}};
  EXPECT_THROW(sc.validate(), DomainError);
}

TEST(Simulator, IncompletenessRemovesSmallEarlyAftershocks) {
  const Catalog c({{0.0, 7.0, 0},
                   {0.01, 3.5, 1},   // threshold 7-3.8+2 = 5.2 -> hidden
                   {0.5, 3.6, 2},    // threshold 3.2+0.30 = 3.50 -> kept
                   {0.02, 5.5, 3},   // above threshold
                   {20.0, 2.6, 4},   // threshold 3.2-1.3 = 1.9 -> kept
                   {-1.0, 2.6, 5}}); // before the reference
  const Catalog out = apply_incompleteness(c, {3.8, 1.0, std::nullopt}, std::vector<std::int64_t>{0});
  std::vector<std::int64_t> ids;
  for (const auto& e : out) ids.push_back(e.id);
  EXPECT_EQ(ids, (std::vector<std::int64_t>{5, 0, 3, 2, 4}));
  EXPECT_THROW((void)apply_incompleteness(c, {}, std::vector<std::int64_t>{42}), ConfigError);
  EXPECT_THROW((void)apply_incompleteness(c, {}, std::vector<std::int64_t>{}), ConfigError);
  EXPECT_THROW((IncompletenessModel{3.8, 0.0, std::nullopt}).validate(), ConfigError);
  // every event above 6.9 becomes a reference
  const Catalog auto_ref = apply_incompleteness(c, {3.8, 1.0, 6.9}, std::vector<std::int64_t>{});
  EXPECT_EQ(auto_ref.size(), 5u);
}
