#pragma once

// Test-side reference implementations. These deliberately do NOT share code
// with the library: the oracle simulator works per pattern with explicit
// 2-input truth-table folds and memoized recursion instead of packed words
// and a precomputed topological order, so agreement between the two is
// meaningful evidence.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "htwb/logicsim.hpp"
#include "htwb/netlist.hpp"
#include "htwb/rng.hpp"

namespace testutil {

inline int and2(int a, int b) { return a & b; }
inline int or2(int a, int b) { return a | b; }
inline int xor2(int a, int b) { return a ^ b; }
inline int xnor2(int a, int b) { return a == b ? 1 : 0; }

/// Gate semantics by definition: NAND/NOR are inverted n-ary AND/OR;
/// XOR/XNOR fold their 2-input gate left-to-right.
inline int oracle_gate(htwb::GateKind kind, const std::vector<int>& in) {
  using htwb::GateKind;
  int acc = in[0];
  switch (kind) {
    case GateKind::And:
    case GateKind::Nand:
      for (std::size_t i = 1; i < in.size(); ++i) acc = and2(acc, in[i]);
      return kind == GateKind::Nand ? 1 - acc : acc;
    case GateKind::Or:
    case GateKind::Nor:
      for (std::size_t i = 1; i < in.size(); ++i) acc = or2(acc, in[i]);
      return kind == GateKind::Nor ? 1 - acc : acc;
    case GateKind::Xor:
      for (std::size_t i = 1; i < in.size(); ++i) acc = xor2(acc, in[i]);
      return acc;
    case GateKind::Xnor:
      for (std::size_t i = 1; i < in.size(); ++i) acc = xnor2(acc, in[i]);
      return acc;
    case GateKind::Not:
      return 1 - acc;
    case GateKind::Buff:
      return acc;
  }
  return -1;
}

/// Memoized-recursion simulator (does not use Circuit::topo_order()).
inline std::vector<int> oracle_simulate(const htwb::Circuit& c, const htwb::Pattern& p) {
  std::vector<int> value(c.net_count(), -1);
  for (std::size_t i = 0; i < c.primary_inputs().size(); ++i)
    value[c.primary_inputs()[i]] = p.bits[i];

  std::function<int(htwb::NetId)> eval = [&](htwb::NetId net) -> int {
    if (value[net] >= 0) return value[net];
    const std::int32_t gi = c.driver_gate(net);
    const htwb::Gate& g = c.gates()[gi];
    std::vector<int> in;
    in.reserve(g.fanin.size());
    for (const htwb::NetId f : g.fanin) in.push_back(eval(f));
    return value[net] = oracle_gate(g.kind, in);
  };
  for (htwb::NetId net = 0; net < c.net_count(); ++net) eval(net);
  return value;
}

/// Index pattern for exhaustive sweeps: bit i of `index` = input i.
inline htwb::Pattern index_pattern(std::size_t n_inputs, std::uint64_t index) {
  htwb::Pattern p;
  p.bits.resize(n_inputs);
  for (std::size_t i = 0; i < n_inputs; ++i) p.bits[i] = (index >> i) & 1u;
  return p;
}

/// Random DAG over the full gate alphabet. Every net is reachable as a gate
/// fanin candidate; sinks are collected as outputs so nothing dangles.
inline htwb::Circuit random_circuit(htwb::SplitMix64& rng, std::size_t n_inputs,
                                    std::size_t n_gates, const std::string& name = "rand") {
  htwb::CircuitBuilder b(name);
  std::vector<std::string> nets;
  for (std::size_t i = 0; i < n_inputs; ++i) {
    nets.push_back("i" + std::to_string(i));
    b.add_input(nets.back());
  }
  static constexpr htwb::GateKind kKinds[] = {
      htwb::GateKind::And,  htwb::GateKind::Nand, htwb::GateKind::Or,  htwb::GateKind::Nor,
      htwb::GateKind::Xor,  htwb::GateKind::Xnor, htwb::GateKind::Not, htwb::GateKind::Buff};

  std::vector<int> fanout_count(n_inputs, 0);
  for (std::size_t g = 0; g < n_gates; ++g) {
    const htwb::GateKind kind = kKinds[rng.next_below(8)];
    const bool unary = kind == htwb::GateKind::Not || kind == htwb::GateKind::Buff;
    const std::size_t arity = unary ? 1 : 2 + rng.next_below(3);
    std::vector<std::string_view> fanin;
    for (std::size_t a = 0; a < arity; ++a) {
      const std::size_t pick = rng.next_below(nets.size());
      fanin.push_back(nets[pick]);
      ++fanout_count[pick];
    }
    const std::string out = "g" + std::to_string(g);
    b.add_gate(kind, out, fanin);
    nets.push_back(out);
    fanout_count.push_back(0);
  }
  bool have_output = false;
  for (std::size_t k = n_inputs; k < nets.size(); ++k) {
    if (fanout_count[k] == 0) {
      b.mark_output(nets[k]);
      have_output = true;
    }
  }
  if (!have_output) b.mark_output(nets.back());
  return std::move(b).build();
}

inline const char* kC17Text = R"(# c17
INPUT(1)
INPUT(2)
INPUT(3)
INPUT(6)
INPUT(7)
OUTPUT(22)
OUTPUT(23)
10 = NAND(1, 3)
11 = NAND(3, 6)
16 = NAND(2, 11)
19 = NAND(11, 7)
22 = NAND(10, 16)
23 = NAND(16, 19)
)";

}  // namespace testutil
