#include <benchmark/benchmark.h>

#include "gammastab/example_data.hpp"
#include "gammastab/generators.hpp"
#include "gammastab/network_sim.hpp"
#include "gammastab/normal_form.hpp"

using namespace gammastab;

namespace {

GeneratedSystem generated(Index blocks, Index size, std::uint64_t seed) {
  Rng rng(seed);
  NormalFormRecipe r;
  r.block_sizes.assign(static_cast<size_t>(blocks), size);
  r.m = size;
  r.p = 1;
  r.ell = 2;
  return generate_normal_form_system(r, rng);
}

void BM_SvdChain(benchmark::State& state) {
  const GeneratedSystem g = generated(state.range(0), 3, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(svd_reduction_chain(g.sys.A, g.sys.B));
  }
  state.SetLabel("n = " + std::to_string(g.sys.n()));
}
BENCHMARK(BM_SvdChain)->Arg(2)->Arg(4)->Arg(8);

void BM_StateFeedback(benchmark::State& state) {
  const GeneratedSystem g = generated(state.range(0), 2, 12);
  const NormalForm nf = normal_form(g.sys);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize_state_feedback(nf, 0.5));
  }
}
BENCHMARK(BM_StateFeedback)->Arg(2)->Arg(3)->Arg(4);

void BM_Regulator(benchmark::State& state) {
  const BundledExample ex = bundled_example();
  const AgentMatrices a = example_agent().nominal;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_regulator_equations(a.A, a.B, a.C, ex.A_o, ex.C_o));
  }
}
BENCHMARK(BM_Regulator);

void BM_NetworkSteps(benchmark::State& state) {
  const BundledExample ex = bundled_example();
  const NetworkDesign net = design_network(ex.agents, ex.adjacency, ex.A_o, ex.C_o, ex.reference,
                                           ex.gamma, SyncOptions{1.0, ex.M, ex.N});
  const Vec x0 = random_initial_state(net, 1);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 1.0;
  cfg.record_every = 10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_network(net, x0, cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.steps());
}
BENCHMARK(BM_NetworkSteps)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
