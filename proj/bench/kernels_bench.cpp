// Serial reference vs OpenMP for the data-parallel kernels.
// Arg 0 runs serially, arg 1 with OpenMP.

#include "ehrcsd/bootstrap.hpp"
#include "ehrcsd/pipeline.hpp"
#include "ehrcsd/precedence.hpp"
#include "ehrcsd/scoring.hpp"
#include "ehrcsd/search.hpp"
#include "ehrcsd/synthgen.hpp"

#include <benchmark/benchmark.h>

using namespace ehrcsd;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::serial : Execution::parallel; }

struct Fixture {
  TruthModel model = random_truth_model({}, 42);
  SyntheticCohort cohort = generate(model, 20000, 7, Execution::parallel);
  ConditionCatalog catalog = synthetic_catalog(model);
  TransformedDataset data = transform(cohort.streams, model.cross_sections(), catalog, Execution::parallel);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_generate(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(generate(f.model, 20000, 7, mode(state)));
}

void BM_transform(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(transform(f.cohort.streams, f.model.cross_sections(), f.catalog, mode(state)));
}

void BM_precedence_table(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(precedence_table(f.data, 1.5, std::nullopt, mode(state)));
}

void BM_discover(benchmark::State& state) {
  const auto& f = fixture();
  const auto candidates = build_candidate_set(f.data, 1.5);
  SearchOptions options;
  options.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(discover(f.data, candidates, options));
}

void BM_bootstrap(benchmark::State& state) {
  const auto& f = fixture();
  const std::span<const EventStream> streams(f.cohort.streams.data(), 2000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap_run(streams, f.model.cross_sections(), InclusionCriteria{}, f.catalog, {},
                                           {8, 1, mode(state)}));
  }
}

} // namespace

BENCHMARK(BM_generate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_transform)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_precedence_table)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_discover)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bootstrap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
