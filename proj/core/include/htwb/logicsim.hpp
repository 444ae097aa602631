#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "htwb/netlist.hpp"
#include "htwb/rng.hpp"

namespace htwb {

/// Supplied input patterns do not match the circuit's primary input count.
class PatternSizeMismatch : public Error {
public:
  PatternSizeMismatch(std::size_t got, std::size_t want)
      : Error("pattern has " + std::to_string(got) + " bits, circuit has " +
              std::to_string(want) + " inputs") {}
};

/// Exhaustive campaign requested on a circuit with too many inputs.
class TooManyInputs : public Error {
public:
  TooManyInputs(std::size_t inputs, std::size_t limit)
      : Error("exhaustive campaign over " + std::to_string(inputs) +
              " inputs exceeds limit of " + std::to_string(limit)) {}
};

/// One assignment to the primary inputs, bit i = value of primary_inputs()[i].
struct Pattern {
  std::vector<std::uint8_t> bits;

  bool operator==(const Pattern&) const = default;

  std::string to_string() const;                     // e.g. "01101"
  static Pattern from_string(std::string_view s);    // inverse
};

/// Net-major packed simulation values: row(net) holds one bit per pattern,
/// 64 patterns per word. Tail bits of the last word are zero.
class ValueTable {
public:
  ValueTable(std::size_t net_count, std::size_t pattern_count);

  std::size_t net_count() const { return net_count_; }
  std::size_t pattern_count() const { return pattern_count_; }
  std::size_t words_per_row() const { return words_per_row_; }

  std::span<std::uint64_t> row(NetId id) {
    return {storage_.data() + id * words_per_row_, words_per_row_};
  }
  std::span<const std::uint64_t> row(NetId id) const {
    return {storage_.data() + id * words_per_row_, words_per_row_};
  }

  bool get(NetId id, std::size_t pattern) const {
    return (storage_[id * words_per_row_ + (pattern >> 6)] >> (pattern & 63)) & 1u;
  }

  std::uint64_t popcount_row(NetId id) const;

private:
  std::size_t net_count_;
  std::size_t pattern_count_;
  std::size_t words_per_row_;
  std::vector<std::uint64_t> storage_;
};

/// Evaluates the circuit on a batch of patterns, 64 per machine word.
/// Multi-input XOR/XNOR are left-folds of the 2-input gate, so an XNOR over
/// k fanins equals the parity of its fanins negated iff k is even.
ValueTable evaluate(const Circuit& circuit, std::span<const Pattern> patterns);

/// Scalar reference path for a single pattern (no packing). Same semantics
/// as evaluate(); used directly by witness checks.
std::vector<std::uint8_t> evaluate_single(const Circuit& circuit, const Pattern& pattern);

/// Per-net switching profile of a simulation campaign.
///   activity   = min(p1, 1 - p1), in [0, 0.5]
///   rare_value = 1 iff p1 < 0.5 (ties resolve to 0)
struct SwitchingStats {
  std::uint64_t pattern_count = 0;
  std::vector<std::uint64_t> ones;   // per net: patterns where the net was 1
  std::vector<double> activity;
  std::vector<std::uint8_t> rare_value;
  std::string source;                // "splitmix64" or "exhaustive"
  std::uint64_t seed = 0;

  double p_one(NetId id) const {
    return pattern_count ? static_cast<double>(ones[id]) / static_cast<double>(pattern_count) : 0.0;
  }

  static SwitchingStats from_counts(std::vector<std::uint64_t> ones, std::uint64_t patterns);
};

/// Uniform random campaign of `count` patterns from `seed`. Patterns are
/// generated as PI-major 64-pattern word blocks straight from the stream:
/// word k of block b for input i is stream_word(seed, b * n_inputs + i).
/// campaign_pattern() reproduces any single pattern from (seed, index).
SwitchingStats random_campaign(const Circuit& circuit, std::uint64_t count, std::uint64_t seed);

/// Streams the same campaign block by block: visit(table, first) is called
/// for each evaluated batch, `first` being the campaign index of the block's
/// first pattern (always a multiple of 64). Lets callers record per-pattern
/// values without holding the whole campaign in memory.
void random_campaign_scan(const Circuit& circuit, std::uint64_t count, std::uint64_t seed,
                          const std::function<void(const ValueTable&, std::uint64_t)>& visit);

/// All 2^n patterns in counting order (bit i of the index = input i).
/// Throws TooManyInputs above 24 inputs.
SwitchingStats exhaustive_campaign(const Circuit& circuit);
inline constexpr std::size_t kExhaustiveInputLimit = 24;

/// Pattern `index` of the random campaign (seed, count independent).
Pattern campaign_pattern(const Circuit& circuit, std::uint64_t seed, std::uint64_t index);

/// Switching profile as serialized JSON keyed by net name.
std::string stats_to_json(const Circuit& circuit, const SwitchingStats& stats);

}  // namespace htwb
