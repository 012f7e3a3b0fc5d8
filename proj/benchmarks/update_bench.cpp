#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dhla/engine.hpp"
#include "dhla/sketch.hpp"

namespace {

std::vector<dhla::HostPair> pairs(std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<dhla::HostPair> out(n);
  for (auto& p : out) {
    p.candidate = dhla::HostKey{static_cast<std::uint32_t>(rng())};
    p.opposite = dhla::HostKey{static_cast<std::uint32_t>(rng())};
  }
  return out;
}

void BM_Update(benchmark::State& state) {
  const auto input = pairs(1 << 20);
  dhla::Dhla sketch{dhla::DhgParams{}};
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& p = input[i++ & (input.size() - 1)];
    sketch.update(p.candidate, p.opposite);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Update);

void BM_BuildSketch(benchmark::State& state) {
  const auto input = pairs(1 << 20);
  const auto workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    auto s = dhla::build_sketch(input, dhla::DhgParams{}, workers, 65536);
    benchmark::DoNotOptimize(s.words().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(input.size()));
}
BENCHMARK(BM_BuildSketch)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
