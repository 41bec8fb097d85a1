// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cyclic_swarm/kernels.hpp"
#include "cyclic_swarm/spectral.hpp"

namespace ks = cyclic_swarm::kernels;
using cyclic_swarm::Vec2;

namespace {

struct Swarm {
  std::vector<Vec2> positions;
  std::vector<std::uint8_t> flags;
  std::vector<std::size_t> prey, cluster_of;
  std::vector<std::uint8_t> active;

  explicit Swarm(std::size_t n) : positions(n), flags(n), prey(n), cluster_of(n), active(n, 1) {
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> box(-5.0, 5.0);
    for (std::size_t i = 0; i < n; ++i) {
      positions[i] = {box(rng), box(rng)};
      flags[i] = static_cast<std::uint8_t>(rng() & 1u);
      prey[i] = (i + 1) % n;
      cluster_of[i] = i;
    }
  }
  ks::BugsView view() const { return {positions, prey, cluster_of, active, flags}; }
};

template <auto Kernel>
void linear_rhs(benchmark::State& state) {
  const Swarm s(static_cast<std::size_t>(state.range(0)));
  std::vector<Vec2> out(s.positions.size());
  for (auto _ : state) {
    Kernel(s.positions, s.flags, Vec2{0.3, -0.2}, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void bugs_rhs(benchmark::State& state) {
  const Swarm s(static_cast<std::size_t>(state.range(0)));
  std::vector<Vec2> out(s.positions.size());
  std::vector<double> dist(s.positions.size());
  for (auto _ : state) {
    Kernel(s.view(), Vec2{0.3, -0.2}, out, dist);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Project, auto Synthesize>
void spectral_roundtrip(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto basis = cyclic_swarm::build_basis(n);
  std::vector<double> x(n), back(n), residue(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(0.1 * static_cast<double>(i));
  std::vector<ks::Complex> coef(n);
  for (auto _ : state) {
    Project(basis.matrix(), x, coef);
    Synthesize(basis.matrix(), coef, back, residue);
    benchmark::DoNotOptimize(back.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

}  // namespace

BENCHMARK(linear_rhs<ks::serial::linear_rhs>)->Name("linear_rhs/serial")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(linear_rhs<ks::omp::linear_rhs>)->Name("linear_rhs/omp")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(bugs_rhs<ks::serial::bugs_rhs>)->Name("bugs_rhs/serial")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(bugs_rhs<ks::omp::bugs_rhs>)->Name("bugs_rhs/omp")->RangeMultiplier(8)->Range(64, 1 << 18);
BENCHMARK(spectral_roundtrip<ks::serial::spectral_project, ks::serial::spectral_synthesize>)
    ->Name("spectral/serial")->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(spectral_roundtrip<ks::omp::spectral_project, ks::omp::spectral_synthesize>)
    ->Name("spectral/omp")->RangeMultiplier(4)->Range(16, 1024);

BENCHMARK_MAIN();
