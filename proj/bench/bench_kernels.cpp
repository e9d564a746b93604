// Serial reference kernels against their OpenMP versions, plus the two
// analyses whose outer loops are parallel.

#include <benchmark/benchmark.h>

#include <map>

#include "esw/hrir.hpp"
#include "esw/kernels.hpp"
#include "esw/mtbe.hpp"
#include "esw/posc.hpp"
#include "esw/random.hpp"
#include "esw/render.hpp"

using namespace esw;

namespace {

const Signal& noise(std::size_t n, std::uint64_t seed) {
  static std::map<std::pair<std::size_t, std::uint64_t>, Signal> cache;
  auto it = cache.find({n, seed});
  if (it == cache.end()) it = cache.emplace(std::make_pair(n, seed), white_noise(n, 1.0, seed)).first;
  return it->second;
}

template <bool Parallel>
void BM_CrossCorrelate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto& a = noise(n, 1);
  const auto& b = noise(n, 2);
  for (auto _ : state) {
    auto r = Parallel ? kernels::cross_correlate(a.view(), b.view(), -48, 48)
                      : kernels::reference::cross_correlate(a.view(), b.view(), -48, 48);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * 97);
}

template <bool Parallel>
void BM_Convolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto& x = noise(n, 3);
  const std::vector<double> h(noise(256, 4).samples());
  for (auto _ : state) {
    auto y = Parallel ? kernels::convolve(x.view(), h) : kernels::reference::convolve(x.view(), h);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * 256);
}

template <bool Parallel>
void BM_BlockEnergies(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto& y = noise(n, 5);
  for (auto _ : state) {
    auto e = Parallel ? kernels::block_energies(y.view(), 64) : kernels::reference::block_energies(y.view(), 64);
    benchmark::DoNotOptimize(e.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <Exec E>
void BM_Spatiogram(benchmark::State& state) {
  static const auto bank = hrir::synth_spherical_bank();
  static const auto basis = hrir::phase_basis(bank);
  const auto spec = render::make_scenario(render::ScenarioKind::kEnsemble, 0.0, 30.0, 3, 1);
  static const auto pair = render::render_hrir(render::independent_sources(spec, 5 * 48000, 9), spec, bank);
  for (auto _ : state) {
    auto sg = posc::spatiogram(pair.left, pair.right, basis, {}, E);
    benchmark::DoNotOptimize(sg.values.data());
  }
}

template <Exec E>
void BM_PatchEnergies(benchmark::State& state) {
  static const auto bank = mtbe::build_filterbank(48000);
  const auto& s = noise(2 * 48000, 6);
  for (auto _ : state) {
    auto te = mtbe::patch_energies(s, bank, E);
    benchmark::DoNotOptimize(te.energies.data());
  }
}

}  // namespace

BENCHMARK(BM_CrossCorrelate<false>)->Name("cross_correlate/serial")->Arg(1 << 16)->Arg(1 << 19);
BENCHMARK(BM_CrossCorrelate<true>)->Name("cross_correlate/omp")->Arg(1 << 16)->Arg(1 << 19);
BENCHMARK(BM_Convolve<false>)->Name("convolve/serial")->Arg(1 << 16)->Arg(1 << 19);
BENCHMARK(BM_Convolve<true>)->Name("convolve/omp")->Arg(1 << 16)->Arg(1 << 19);
BENCHMARK(BM_BlockEnergies<false>)->Name("block_energies/serial")->Arg(1 << 20);
BENCHMARK(BM_BlockEnergies<true>)->Name("block_energies/omp")->Arg(1 << 20);
BENCHMARK(BM_Spatiogram<Exec::kSerial>)->Name("spatiogram/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spatiogram<Exec::kParallel>)->Name("spatiogram/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PatchEnergies<Exec::kSerial>)->Name("patch_energies/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PatchEnergies<Exec::kParallel>)->Name("patch_energies/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
