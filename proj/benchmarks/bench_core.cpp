#include <benchmark/benchmark.h>

#include <random>

#include "rbl/agent.hpp"

using namespace rbl;

namespace {

std::vector<SensedEntity> crowd(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> dist(1.0, 9.0);
  std::vector<SensedEntity> out;
  for (int k = 0; k < n; ++k) {
    const double a = ang(rng), d = dist(rng);
    SensedEntity e;
    e.position = {d * std::cos(a), d * std::sin(a)};
    e.radius = k % 3 == 0 ? 0.15 : 0.2;
    e.kind = k % 3 == 0 ? EntityKind::obstacle : EntityKind::robot;
    out.push_back(e);
  }
  return out;
}

void BM_halfplane_clip(benchmark::State& state) {
  const auto disc = disc_polygon({0, 0}, 5.0, 64);
  const HalfPlane hp({1, 0.3}, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(halfplane_clip(disc, hp));
}
BENCHMARK(BM_halfplane_clip);

void BM_build_cell_A(benchmark::State& state) {
  const auto sensed = crowd(static_cast<int>(state.range(0)), 1);
  const CellParams params;
  for (auto _ : state) benchmark::DoNotOptimize(build_cell_A({0, 0}, sensed, params));
}
BENCHMARK(BM_build_cell_A)->Arg(4)->Arg(16)->Arg(64);

void BM_weighted_centroid(benchmark::State& state) {
  const auto cell = build_cell_A({0, 0}, crowd(8, 2), CellParams{});
  const double beta = state.range(0) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(weighted_centroid(cell, {40, 0}, beta));
}
BENCHMARK(BM_weighted_centroid)->Arg(5)->Arg(15)->Arg(100)->Arg(500);

void BM_beta_min(benchmark::State& state) {
  const auto cell = build_cell_A({0, 0}, crowd(8, 3), CellParams{});
  for (auto _ : state) benchmark::DoNotOptimize(beta_min(cell, {40, 0}, 1.0));
}
BENCHMARK(BM_beta_min);

void BM_decide(benchmark::State& state) {
  AgentConfig cfg;
  cfg.goal = {40, 0};
  cfg.d_u_measurement = 1.0;
  std::vector<Measurement> m;
  int id = 0;
  for (const auto& e : crowd(static_cast<int>(state.range(0)), 4)) {
    m.push_back({id++, e.position, 0.16, e.kind, e.radius});
  }
  const AdaptiveState s{0.15, cfg.goal, false};
  for (auto _ : state) benchmark::DoNotOptimize(decide({0, 0}, s, m, cfg));
}
BENCHMARK(BM_decide)->Arg(4)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
