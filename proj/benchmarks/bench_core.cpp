#include <benchmark/benchmark.h>

#include "kgm/solver.hpp"

namespace {

using namespace kgm;

struct Fixture {
  RadialDomain dom;
  PhysicsParams p;
  ChiField chi;
  DomainConstants dc;
  GridFunction u0;

  explicit Fixture(int n)
      : dom(RadialDomain::make(1.0, n)) {
    p.m = 1.0;
    p.omega = 0.5;
    p.q = CouplingField::make(
        dom, GridFunction::sample(dom, Bc::NeumannBoth, [](double) {
          return 1.0;
        }),
        1.0);
    p.bd = BoundaryData::make(0.05, dom);
    chi = solve_chi(p.bd, dom);
    dc = compute_constants(dom, p, chi);
    u0 = default_start(dom, p);
  }
};

void bm_reduce(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto s = reduce(fx.dom, fx.p, fx.u0, fx.chi);
    benchmark::DoNotOptimize(s.theta_bar);
  }
}

void bm_evaluate_j(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto rep = evaluate_j(fx.dom, fx.p, fx.u0, fx.chi);
    benchmark::DoNotOptimize(rep.j);
  }
}

void bm_gradient(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  const auto s = reduce(fx.dom, fx.p, fx.u0, fx.chi);
  for (auto _ : state) {
    auto g = gradient_j(fx.dom, fx.p, s, fx.chi);
    benchmark::DoNotOptimize(g.values.data());
  }
}

void bm_minimize(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto res = minimize(fx.dom, fx.u0, fx.p, fx.chi, fx.dc);
    benchmark::DoNotOptimize(res.j_star);
  }
}

BENCHMARK(bm_reduce)->Arg(251)->Arg(1001)->Arg(4001);
BENCHMARK(bm_evaluate_j)->Arg(251)->Arg(1001)->Arg(4001);
BENCHMARK(bm_gradient)->Arg(251)->Arg(1001)->Arg(4001);
BENCHMARK(bm_minimize)->Arg(251)->Arg(1001)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
