#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "qlindblad/config.hpp"
#include "qlindblad/evolution.hpp"
#include "qlindblad/fock.hpp"
#include "qlindblad/initial_state.hpp"
#include "qlindblad/scenarios.hpp"
#include "qlindblad/trajectories.hpp"

using namespace qlindblad;

namespace {

RunConfig standard_config(int sites) {
  RunConfig c;
  c.sites = sites;
  c.n_max = 2;
  c.particle_mass = 0.2;
  c.steps = 40;
  c.packets = {{sites * 0.3, 2.0, 0.0, 0.0}, {sites * 0.7, 2.0, 0.0, 1.0}};
  return c;
}

struct Fixture {
  RunConfig cfg;
  QuasiLindbladEvolution evo;
  std::shared_ptr<const FockSpace> space;
  SectoredDensityMatrix rho;

  explicit Fixture(int sites)
      : cfg(standard_config(sites)), evo(cfg.setup()), space(make_space(cfg)), rho(initial_state(cfg, evo, space)) {
    rho = evo.evolve(rho, sites / 6);
  }
};

void BM_WalkStep(benchmark::State& state) {
  const int sites = static_cast<int>(state.range(0));
  const Lattice lat{sites, 1.0, 0.0};
  const DiracWalk walk(lat, ChartGeometry::kruskal(4.0 * sites * sites), 0.2, 1.0);
  Eigen::VectorXcd chi = gaussian_packet(lat, {sites / 2.0, 4.0, 0.0, 0.5});
  int k = 0;
  for (auto _ : state) {
    walk.step(chi, k++ % 16);
    benchmark::DoNotOptimize(chi.data());
  }
  state.SetItemsProcessed(state.iterations() * lat.modes());
}
BENCHMARK(BM_WalkStep)->Arg(64)->Arg(256)->Arg(1024);

void BM_LindbladStep(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto next = fx.evo.lindblad_step(fx.rho);
    benchmark::DoNotOptimize(next.factor(2).data());
  }
}
BENCHMARK(BM_LindbladStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Compare(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  const auto other = fx.evo.lindblad_step(fx.rho);
  SectoredDensityMatrix shifted = other;
  shifted.step = fx.rho.step;
  for (auto _ : state) benchmark::DoNotOptimize(compare(fx.rho, shifted).total);
}
BENCHMARK(BM_Compare)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FieldVelocity(benchmark::State& state) {
  const Fixture fx(64);
  const DensityTimeline tl = build_annihilation_timeline(fx.evo, fx.rho, 8);
  std::mt19937_64 rng(3);
  std::vector<std::vector<double>> configs;
  for (int i = 0; i < 256; ++i) configs.push_back(sample_configuration(tl, 0, rng));
  std::size_t i = 0;
  for (auto _ : state) {
    double w = 0.0;
    const auto& x = configs[i++ % configs.size()];
    benchmark::DoNotOptimize(field_velocity(tl, 0, x, 0.25, &w));
  }
}
BENCHMARK(BM_FieldVelocity);

void BM_PartialTrace(benchmark::State& state) {
  const Fixture fx(64);
  std::vector<int> region;
  for (int i = 0; i < 16; ++i) region.push_back(i);
  for (auto _ : state) benchmark::DoNotOptimize(partial_trace_over_region(fx.rho, region).trace());
}
BENCHMARK(BM_PartialTrace)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
