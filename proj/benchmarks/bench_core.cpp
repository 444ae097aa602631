// Throughput benchmarks for the hot paths: bit-parallel evaluation, the
// random campaign loop and the controllability pass, all on the largest
// suite circuit.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "htwb/logicsim.hpp"
#include "htwb/netlist.hpp"
#include "htwb/rng.hpp"
#include "htwb/testability.hpp"

namespace {

using namespace htwb;

const Circuit& big_circuit() {
  static const Circuit c =
      parse_bench_file(std::string(HTWB_CIRCUITS_DIR "/synth85/c6288_slot.bench"));
  return c;
}

std::vector<Pattern> random_patterns(const Circuit& c, std::size_t count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Pattern> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Pattern p;
    p.bits.resize(c.primary_inputs().size());
    for (auto& b : p.bits) b = rng.next() & 1u;
    out.push_back(std::move(p));
  }
  return out;
}

void BM_evaluate(benchmark::State& state) {
  const Circuit& c = big_circuit();
  const auto patterns = random_patterns(c, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    const ValueTable table = evaluate(c, patterns);
    benchmark::DoNotOptimize(table.popcount_row(c.primary_outputs().front()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) *
                          static_cast<std::int64_t>(c.gate_count()));
}
BENCHMARK(BM_evaluate)->Arg(1024)->Arg(8192);

void BM_random_campaign(benchmark::State& state) {
  const Circuit& c = big_circuit();
  for (auto _ : state) {
    const SwitchingStats stats =
        random_campaign(c, static_cast<std::size_t>(state.range(0)), 7);
    benchmark::DoNotOptimize(stats.ones.front());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_random_campaign)->Arg(10'000);

void BM_controllability(benchmark::State& state) {
  const Circuit& c = big_circuit();
  for (auto _ : state) {
    const ControllabilityTable table = compute_controllability(c);
    benchmark::DoNotOptimize(table.imbalance.back());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.gate_count()));
}
BENCHMARK(BM_controllability);

}  // namespace

BENCHMARK_MAIN();
