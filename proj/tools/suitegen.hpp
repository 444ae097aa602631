#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace htwb::suitegen {

/// How a stand-in's rare cluster heads are wired.
///   NestedShared: AND(s1, s2, AND(d, OR(e, AND(f, g)))) -> p(head) = 5/64
///   FlatDisjoint: AND(p, q, r, s) over per-head inputs   -> p(head) = 1/16
///   FlatShared:   AND(s1, s2, q, r), s1/s2 common         -> p(head) = 1/16
enum class HeadStyle : std::uint8_t { NestedShared, FlatDisjoint, FlatShared };

struct StandinSpec {
  std::string name;
  std::size_t n_inputs = 0;
  std::size_t n_outputs = 0;
  /// Desired gate count; the builder lands within a few gates of it.
  std::size_t target_gates = 0;
  std::size_t head_count = 0;
  HeadStyle style = HeadStyle::FlatDisjoint;
  std::uint64_t seed = 0;
};

/// Deterministic synthetic netlist in canonical bench text. The circuit is
/// engineered so that under uniform input stimulus exactly the cluster heads
/// have switching activity below 0.1 (flat heads 1/16, nested heads 5/64)
/// while every other net stays at or above 0.125, and so that every net
/// reaches a primary output through XOR gates only (no payload masking).
std::string make_standin(const StandinSpec& spec);

/// Ripple-carry array multiplier: inputs A0..A{n-1}, B0..B{n-1}, outputs
/// P0..P{2n-1} with P = A * B. Used as the functionally checkable member of
/// the suite.
std::string make_multiplier(std::size_t bits, const std::string& name);

struct SuiteFile {
  std::string filename;  // relative path, e.g. "synth85/c432_slot.bench"
  std::string text;
};

/// The committed circuit suite: authentic c17 plus six synthetic stand-ins
/// sized like the classic combinational benchmarks.
std::vector<SuiteFile> generate_suite();

}  // namespace htwb::suitegen
