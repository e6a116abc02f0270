#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include <bgsdc/collocation.hpp>
#include <bgsdc/fields.hpp>
#include <bgsdc/gmres.hpp>
#include <bgsdc/integrators.hpp>
#include <bgsdc/sdc.hpp>
#include <bgsdc/stepper.hpp>

using namespace bgsdc;

namespace {

const ParticleState kStart{{1.0, 0.0, 0.0}, {100.0, 0.0, 50.0}, 0.0};
constexpr double kDt = 0.1 / 400.0;

void BM_MirrorField(benchmark::State& state) {
  const MirrorField f(MirrorParams{});
  Vec3 p{1.0, 0.5, 0.25};
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.B_at(p));
    p.z += 1e-9;
  }
}
BENCHMARK(BM_MirrorField);

void BM_SolovevField(benchmark::State& state) {
  const SolovevField f(SolovevParams{});
  Vec3 p{3.2, 0.1, 0.4};
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.sample(p));
    p.z += 1e-9;
  }
}
BENCHMARK(BM_SolovevField);

void BM_NonstaggeredBorisStep(benchmark::State& state) {
  const MirrorField f(MirrorParams{});
  ParticleState s = kStart;
  for (auto _ : state) {
    s = step_nonstaggered(s, kDt, f, 1.0);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_NonstaggeredBorisStep);

// Arguments: M, K_gmres, K_picard.
void BM_BgsdcStep(benchmark::State& state) {
  const MirrorField f(MirrorParams{});
  const int M = static_cast<int>(state.range(0));
  const MethodConfig cfg{Method::Bgsdc, M, static_cast<int>(state.range(1)), static_cast<int>(state.range(2)), 1};
  const CollocationTables tables = make_tables(lobatto_nodes(M), kDt);
  PhasePoint p{kStart.x, kStart.v};
  WorkCounter work;
  for (auto _ : state) {
    p = bgsdc_step(p.x, p.v, tables, f, 1.0, cfg, &work).end;
    benchmark::DoNotOptimize(p);
  }
  state.counters["f_evals/step"] =
      benchmark::Counter(static_cast<double>(work.f_evals), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_BgsdcStep)->Args({3, 1, 3})->Args({3, 2, 3})->Args({5, 2, 3})->Args({5, 2, 6});

void BM_BorisSdcStep(benchmark::State& state) {
  const MirrorField f(MirrorParams{});
  const int M = static_cast<int>(state.range(0));
  const MethodConfig cfg{Method::BorisSdc, M, 0, 0, static_cast<int>(state.range(1))};
  const CollocationTables tables = make_tables(lobatto_nodes(M), kDt);
  PhasePoint p{kStart.x, kStart.v};
  for (auto _ : state) {
    p = boris_sdc_step(p.x, p.v, tables, f, 1.0, cfg).end;
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_BorisSdcStep)->Args({3, 4})->Args({5, 6});

void BM_MakeTables(benchmark::State& state) {
  const NodeSet nodes = lobatto_nodes(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(make_tables(nodes, kDt));
}
BENCHMARK(BM_MakeTables)->Arg(3)->Arg(5)->Arg(9);

// GMRES on the preconditioned collocation operator of one mirror step.
void BM_GmresCollocation(benchmark::State& state) {
  const MirrorField f(MirrorParams{});
  const int M = static_cast<int>(state.range(0));
  const CollocationTables tables = make_tables(lobatto_nodes(M), 0.5 / 400.0);
  const NodeSolution U0 = NodeSolution::uniform(static_cast<std::size_t>(M), kStart.x, kStart.v);
  const NodeSolution pred = predictor_sweep(kStart.x, kStart.v, tables, f, 1.0);
  const StepStart start = StepStart::make(kStart.x, kStart.v, f);
  const FrozenField frozen = FrozenField::at_nodes(pred, start, f);
  const FrozenField linear = frozen.linear_part();
  const LinearMap map = [&](std::span<const double> x) {
    const NodeSolution u = unflatten(x);
    return flatten(solve_preconditioner(apply_collocation_operator(u, tables, linear, 1.0), tables, linear, 1.0));
  };
  const std::vector<double> rhs = flatten(solve_preconditioner(U0, tables, frozen, 1.0));
  const std::vector<double> guess = flatten(U0);
  for (auto _ : state) benchmark::DoNotOptimize(gmres_solve(map, rhs, guess, static_cast<int>(state.range(1))));
}
BENCHMARK(BM_GmresCollocation)->Args({3, 2})->Args({5, 2})->Args({5, 6 * 5});

void BM_RunTrajectory(benchmark::State& state) {
  const MirrorField f(MirrorParams{});
  const MethodConfig cfg{Method::Bgsdc, 3, 2, 3, 1};
  RunOptions opt;
  opt.record_stride = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(run_trajectory(kStart, kDt, 1000, f, 1.0, cfg, opt));
}
BENCHMARK(BM_RunTrajectory)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
