#include "htwb/logicsim.hpp"

#include <algorithm>
#include <bit>

#include <nlohmann/json.hpp>

namespace htwb {

std::string Pattern::to_string() const {
  std::string s;
  s.reserve(bits.size());
  for (const std::uint8_t b : bits) s.push_back(b ? '1' : '0');
  return s;
}

Pattern Pattern::from_string(std::string_view s) {
  Pattern p;
  p.bits.reserve(s.size());
  for (const char c : s) {
    if (c != '0' && c != '1') throw Error("pattern string must be 0/1 only");
    p.bits.push_back(c == '1');
  }
  return p;
}

ValueTable::ValueTable(std::size_t net_count, std::size_t pattern_count)
    : net_count_(net_count),
      pattern_count_(pattern_count),
      words_per_row_((pattern_count + 63) / 64),
      storage_(net_count * words_per_row_, 0) {}

std::uint64_t ValueTable::popcount_row(NetId id) const {
  std::uint64_t total = 0;
  for (const std::uint64_t w : row(id)) total += std::popcount(w);
  return total;
}

namespace {

// Evaluates all gates over the packed rows of `table`. Input rows must
// already be filled; tail bits beyond pattern_count must be zero on entry
// and are re-zeroed after negating gates.
void run_kernel(const Circuit& circuit, ValueTable& table) {
  const std::size_t words = table.words_per_row();
  if (words == 0) return;
  const std::size_t tail_bits = table.pattern_count() & 63;
  const std::uint64_t tail_mask = tail_bits ? ((std::uint64_t{1} << tail_bits) - 1) : ~std::uint64_t{0};

  for (const std::uint32_t gi : circuit.topo_order()) {
    const Gate& g = circuit.gates()[gi];
    std::uint64_t* dst = table.row(g.output).data();
    const std::uint64_t* first = table.row(g.fanin[0]).data();
    std::copy(first, first + words, dst);

    bool negate = false;
    switch (g.kind) {
      case GateKind::Nand:
        negate = true;
        [[fallthrough]];
      case GateKind::And:
        for (std::size_t i = 1; i < g.fanin.size(); ++i) {
          const std::uint64_t* src = table.row(g.fanin[i]).data();
          for (std::size_t w = 0; w < words; ++w) dst[w] &= src[w];
        }
        break;
      case GateKind::Nor:
        negate = true;
        [[fallthrough]];
      case GateKind::Or:
        for (std::size_t i = 1; i < g.fanin.size(); ++i) {
          const std::uint64_t* src = table.row(g.fanin[i]).data();
          for (std::size_t w = 0; w < words; ++w) dst[w] |= src[w];
        }
        break;
      case GateKind::Xnor:
        // Left-fold of 2-input XNOR: one negation per fold, so the result
        // is the parity negated iff the fanin count is even.
        negate = (g.fanin.size() % 2) == 0;
        [[fallthrough]];
      case GateKind::Xor:
        for (std::size_t i = 1; i < g.fanin.size(); ++i) {
          const std::uint64_t* src = table.row(g.fanin[i]).data();
          for (std::size_t w = 0; w < words; ++w) dst[w] ^= src[w];
        }
        break;
      case GateKind::Not:
        negate = true;
        break;
      case GateKind::Buff:
        break;
    }

    if (negate) {
      for (std::size_t w = 0; w < words; ++w) dst[w] = ~dst[w];
      dst[words - 1] &= tail_mask;
    }
  }
}

}  // namespace

ValueTable evaluate(const Circuit& circuit, std::span<const Pattern> patterns) {
  const std::size_t n = circuit.primary_inputs().size();
  for (const Pattern& p : patterns)
    if (p.bits.size() != n) throw PatternSizeMismatch(p.bits.size(), n);

  ValueTable table(circuit.net_count(), patterns.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t* row = table.row(circuit.primary_inputs()[i]).data();
    for (std::size_t j = 0; j < patterns.size(); ++j)
      row[j >> 6] |= static_cast<std::uint64_t>(patterns[j].bits[i] & 1u) << (j & 63);
  }
  run_kernel(circuit, table);
  return table;
}

std::vector<std::uint8_t> evaluate_single(const Circuit& circuit, const Pattern& pattern) {
  const std::size_t n = circuit.primary_inputs().size();
  if (pattern.bits.size() != n) throw PatternSizeMismatch(pattern.bits.size(), n);

  std::vector<std::uint8_t> value(circuit.net_count(), 0);
  for (std::size_t i = 0; i < n; ++i)
    value[circuit.primary_inputs()[i]] = pattern.bits[i] & 1u;

  for (const std::uint32_t gi : circuit.topo_order()) {
    const Gate& g = circuit.gates()[gi];
    std::uint8_t acc = value[g.fanin[0]];
    bool negate = false;
    switch (g.kind) {
      case GateKind::Nand: negate = true; [[fallthrough]];
      case GateKind::And:
        for (std::size_t i = 1; i < g.fanin.size(); ++i) acc &= value[g.fanin[i]];
        break;
      case GateKind::Nor: negate = true; [[fallthrough]];
      case GateKind::Or:
        for (std::size_t i = 1; i < g.fanin.size(); ++i) acc |= value[g.fanin[i]];
        break;
      case GateKind::Xnor: negate = (g.fanin.size() % 2) == 0; [[fallthrough]];
      case GateKind::Xor:
        for (std::size_t i = 1; i < g.fanin.size(); ++i) acc ^= value[g.fanin[i]];
        break;
      case GateKind::Not: negate = true; break;
      case GateKind::Buff: break;
    }
    value[g.output] = negate ? (acc ^ 1u) : acc;
  }
  return value;
}

SwitchingStats SwitchingStats::from_counts(std::vector<std::uint64_t> ones, std::uint64_t patterns) {
  SwitchingStats s;
  s.pattern_count = patterns;
  s.ones = std::move(ones);
  s.activity.resize(s.ones.size());
  s.rare_value.resize(s.ones.size());
  for (std::size_t i = 0; i < s.ones.size(); ++i) {
    const double p1 = patterns ? static_cast<double>(s.ones[i]) / static_cast<double>(patterns) : 0.0;
    s.activity[i] = std::min(p1, 1.0 - p1);
    s.rare_value[i] = p1 < 0.5 ? 1 : 0;
  }
  return s;
}

namespace {

constexpr std::size_t kBatchWords = 128;  // 8192 patterns per batch

// Accumulates per-net one-counts over a batched campaign. fill_inputs gets
// (table, batch_first_word_index, words_in_batch).
template <typename FillInputs>
SwitchingStats run_campaign(const Circuit& circuit, std::uint64_t count, FillInputs fill_inputs) {
  std::vector<std::uint64_t> ones(circuit.net_count(), 0);
  const std::uint64_t total_words = (count + 63) / 64;
  for (std::uint64_t word0 = 0; word0 < total_words; word0 += kBatchWords) {
    const std::uint64_t words = std::min<std::uint64_t>(kBatchWords, total_words - word0);
    const std::uint64_t patterns = std::min<std::uint64_t>(words * 64, count - word0 * 64);
    ValueTable table(circuit.net_count(), patterns);
    fill_inputs(table, word0, words);
    run_kernel(circuit, table);
    for (NetId id = 0; id < circuit.net_count(); ++id) ones[id] += table.popcount_row(id);
  }
  return SwitchingStats::from_counts(std::move(ones), count);
}

}  // namespace

namespace {

void fill_random_inputs(const Circuit& circuit, ValueTable& table, std::uint64_t seed,
                        std::uint64_t count, std::uint64_t word0, std::uint64_t words) {
  const std::size_t n = circuit.primary_inputs().size();
  const std::size_t tail_bits = count & 63;
  const std::uint64_t tail_mask =
      tail_bits ? ((std::uint64_t{1} << tail_bits) - 1) : ~std::uint64_t{0};
  const std::uint64_t total_words = (count + 63) / 64;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t* row = table.row(circuit.primary_inputs()[i]).data();
    for (std::uint64_t w = 0; w < words; ++w) {
      std::uint64_t v = stream_word(seed, (word0 + w) * n + i);
      if (word0 + w == total_words - 1) v &= tail_mask;
      row[w] = v;
    }
  }
}

}  // namespace

SwitchingStats random_campaign(const Circuit& circuit, std::uint64_t count, std::uint64_t seed) {
  SwitchingStats stats = run_campaign(
      circuit, count, [&](ValueTable& table, std::uint64_t word0, std::uint64_t words) {
        fill_random_inputs(circuit, table, seed, count, word0, words);
      });
  stats.source = std::string(kRngAlgorithm);
  stats.seed = seed;
  return stats;
}

void random_campaign_scan(const Circuit& circuit, std::uint64_t count, std::uint64_t seed,
                          const std::function<void(const ValueTable&, std::uint64_t)>& visit) {
  const std::uint64_t total_words = (count + 63) / 64;
  for (std::uint64_t word0 = 0; word0 < total_words; word0 += kBatchWords) {
    const std::uint64_t words = std::min<std::uint64_t>(kBatchWords, total_words - word0);
    const std::uint64_t patterns = std::min<std::uint64_t>(words * 64, count - word0 * 64);
    ValueTable table(circuit.net_count(), patterns);
    fill_random_inputs(circuit, table, seed, count, word0, words);
    run_kernel(circuit, table);
    visit(table, word0 * 64);
  }
}

Pattern campaign_pattern(const Circuit& circuit, std::uint64_t seed, std::uint64_t index) {
  const std::size_t n = circuit.primary_inputs().size();
  Pattern p;
  p.bits.resize(n);
  const std::uint64_t block = index >> 6;
  const std::uint64_t bit = index & 63;
  for (std::size_t i = 0; i < n; ++i)
    p.bits[i] = (stream_word(seed, block * n + i) >> bit) & 1u;
  return p;
}

SwitchingStats exhaustive_campaign(const Circuit& circuit) {
  const std::size_t n = circuit.primary_inputs().size();
  if (n > kExhaustiveInputLimit) throw TooManyInputs(n, kExhaustiveInputLimit);
  const std::uint64_t count = std::uint64_t{1} << n;

  SwitchingStats stats = run_campaign(
      circuit, count, [&](ValueTable& table, std::uint64_t word0, std::uint64_t words) {
        const std::size_t patterns = table.pattern_count();
        for (std::size_t i = 0; i < n; ++i) {
          std::uint64_t* row = table.row(circuit.primary_inputs()[i]).data();
          if (i < 6) {
            // Bit j of the pattern index with j < 6 cycles within a word.
            static constexpr std::uint64_t kMask[6] = {
                0xaaaaaaaaaaaaaaaaULL, 0xccccccccccccccccULL, 0xf0f0f0f0f0f0f0f0ULL,
                0xff00ff00ff00ff00ULL, 0xffff0000ffff0000ULL, 0xffffffff00000000ULL};
            for (std::uint64_t w = 0; w < words; ++w) row[w] = kMask[i];
          } else {
            for (std::uint64_t w = 0; w < words; ++w)
              row[w] = ((word0 + w) >> (i - 6)) & 1u ? ~std::uint64_t{0} : 0;
          }
          if (patterns < 64) row[0] &= (std::uint64_t{1} << patterns) - 1;
        }
      });
  stats.source = "exhaustive";
  stats.seed = 0;
  return stats;
}

std::string stats_to_json(const Circuit& circuit, const SwitchingStats& stats) {
  nlohmann::json nets = nlohmann::json::object();
  for (NetId id = 0; id < circuit.net_count(); ++id) {
    nets[circuit.net_name(id)] = {{"ones", stats.ones[id]},
                                  {"p_one", stats.p_one(id)},
                                  {"activity", stats.activity[id]},
                                  {"rare_value", stats.rare_value[id]}};
  }
  const nlohmann::json doc = {{"circuit", circuit.name()},
                              {"pattern_count", stats.pattern_count},
                              {"rng_algorithm", stats.source},
                              {"seed", stats.seed},
                              {"nets", nets}};
  return doc.dump(2);
}

}  // namespace htwb
