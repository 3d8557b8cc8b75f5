#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "etas/binning.hpp"
#include "etas/intensity_sum.hpp"
#include "etas/prior.hpp"
#include "etas/simulator.hpp"
#include "etas/surrogate.hpp"

namespace {

using namespace etas;

std::vector<Event> poisson_events(std::size_t n) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> t(0.0, 1000.0);
  std::exponential_distribution<double> m(std::log(10.0));
  std::vector<Event> ev;
  ev.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ev.push_back({t(rng), 2.5 + m(rng), static_cast<std::int64_t>(i)});
  std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
  return ev;
}

const PriorSpec kPriors{};

LinkedParams default_link() { return link(to_internal(EtasParams{}, kPriors), kPriors); }

void run_intensity(benchmark::State& state, IntensityStrategy strategy) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::size_t> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = i;
  const EventIntensitySum sum(poisson_events(n), targets, 2.5, strategy);
  const LinkedParams lp = default_link();
  std::vector<ComponentValue> out(n);
  for (auto _ : state) {
    sum.evaluate(lp, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}

void BM_IntensityDirect(benchmark::State& state) { run_intensity(state, IntensityStrategy::Direct); }
void BM_IntensityExponentialSum(benchmark::State& state) { run_intensity(state, IntensityStrategy::ExponentialSum); }
BENCHMARK(BM_IntensityDirect)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
BENCHMARK(BM_IntensityExponentialSum)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_OmoriLogIntegral(benchmark::State& state) {
  double a = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(omori_log_integral(a, a + 0.1, 0.11, 1.08));
    a = a < 500.0 ? a * 1.5 + 0.1 : 0.0;
  }
}
BENCHMARK(BM_OmoriLogIntegral);

void BM_LinkAllParams(benchmark::State& state) {
  InternalParams th = to_internal(EtasParams{}, kPriors);
  for (auto _ : state) {
    benchmark::DoNotOptimize(link(th, kPriors));
    th[0] += 1e-9;
  }
}
BENCHMARK(BM_LinkAllParams);

void BM_SurrogateEvaluate(benchmark::State& state) {
  SimConfig sc;
  sc.domain = {0.0, 1000.0, 2.5};
  sc.params.mu = 0.1 * static_cast<double>(state.range(0)) / 200.0;
  sc.seed = 3;
  const Catalog cat = simulate_catalog(sc).catalog;
  const SurrogateData data = assemble_surrogate(cat, Catalog{}, sc.domain);
  const InternalParams th = to_internal(EtasParams{}, kPriors);
  for (auto _ : state) benchmark::DoNotOptimize(data.evaluate(th, kPriors));
  state.counters["events"] = static_cast<double>(data.n_events());
  state.counters["rows"] = static_cast<double>(data.rows().size());
}
BENCHMARK(BM_SurrogateEvaluate)->Arg(200)->Arg(800)->Arg(3200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
