#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "htwb/error.hpp"

namespace htwb {

/// Dense net handle. Ids are assigned in first-mention order while a circuit
/// is built, so a parsed file always yields the same numbering.
using NetId = std::uint32_t;
inline constexpr NetId kNoNet = std::numeric_limits<NetId>::max();

enum class GateKind : std::uint8_t { And, Nand, Or, Nor, Xor, Xnor, Not, Buff };

std::string_view to_string(GateKind kind);
std::optional<GateKind> gate_kind_from_name(std::string_view name);  // case-insensitive

struct Gate {
  GateKind kind;
  NetId output;
  std::vector<NetId> fanin;
};

// --- netlist errors (all derive from htwb::Error) ---

/// A net is referenced as a fanin or declared OUTPUT but never driven and
/// never declared INPUT.
class UndefinedSignal : public Error {
public:
  explicit UndefinedSignal(const std::string& signal)
      : Error("undefined signal: " + signal), signal_(signal) {}
  const std::string& signal() const { return signal_; }

private:
  std::string signal_;
};

/// Two gates (or a gate and an INPUT declaration) drive the same net.
class DuplicateDriver : public Error {
public:
  explicit DuplicateDriver(const std::string& signal)
      : Error("duplicate driver for signal: " + signal) {}
};

/// The gate graph contains a combinational cycle.
class CycleDetected : public Error {
public:
  explicit CycleDetected(const std::string& detail)
      : Error("combinational cycle detected: " + detail) {}
};

/// Malformed source text (or builder misuse such as a 3-input NOT).
class SyntaxError : public Error {
public:
  SyntaxError(const std::string& detail, std::size_t line)
      : Error("syntax error at line " + std::to_string(line) + ": " + detail),
        line_(line) {}
  explicit SyntaxError(const std::string& detail) : Error("syntax error: " + detail), line_(0) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Gate function name outside the supported set.
class UnsupportedGate : public Error {
public:
  UnsupportedGate(const std::string& name, std::size_t line)
      : Error("unsupported gate '" + name + "' at line " + std::to_string(line)) {}
};

/// Immutable gate-level combinational circuit.
///
/// Construction (parser or CircuitBuilder) establishes and then guarantees:
///   - every net has exactly one driver (a gate) or is a primary input
///   - the gate graph is acyclic; topo_order() is a valid evaluation order
///   - fanout/driver adjacency is precomputed (the simulator and the trojan
///     generator walk these maps heavily; building them once is what makes
///     repeated campaigns cheap)
class Circuit {
public:
  /// Empty circuit; useful only as a placeholder before assignment.
  Circuit() = default;

  const std::string& name() const { return name_; }
  std::size_t net_count() const { return net_names_.size(); }
  std::size_t gate_count() const { return gates_.size(); }

  const std::vector<NetId>& primary_inputs() const { return inputs_; }
  const std::vector<NetId>& primary_outputs() const { return outputs_; }
  const std::vector<Gate>& gates() const { return gates_; }

  /// Gate indices in dependency order (fanins come before consumers).
  const std::vector<std::uint32_t>& topo_order() const { return topo_; }

  const std::string& net_name(NetId id) const { return net_names_[id]; }
  std::optional<NetId> find_net(std::string_view name) const;

  bool is_primary_input(NetId id) const { return is_input_[id] != 0; }
  bool is_primary_output(NetId id) const { return is_output_[id] != 0; }

  /// Index of the driving gate, or -1 for primary inputs.
  std::int32_t driver_gate(NetId id) const { return drivers_[id]; }

  /// Indices of gates that consume this net.
  std::span<const std::uint32_t> fanout_gates(NetId id) const {
    return {fanout_flat_.data() + fanout_offsets_[id],
            fanout_flat_.data() + fanout_offsets_[id + 1]};
  }

  /// Depth of each net: 0 for primary inputs, 1 + max(fanin depth) otherwise.
  const std::vector<std::uint32_t>& net_depth() const { return depth_; }

private:
  friend class CircuitBuilder;

  std::string name_;
  std::vector<std::string> net_names_;
  std::unordered_map<std::string, NetId> name_to_id_;
  std::vector<NetId> inputs_;
  std::vector<NetId> outputs_;
  std::vector<Gate> gates_;
  std::vector<std::uint8_t> is_input_;
  std::vector<std::uint8_t> is_output_;
  std::vector<std::int32_t> drivers_;
  std::vector<std::uint32_t> topo_;
  std::vector<std::uint32_t> fanout_offsets_;
  std::vector<std::uint32_t> fanout_flat_;
  std::vector<std::uint32_t> depth_;
};

/// Incremental construction front-end used by the parser, the trojan
/// generator and the synthetic suite generator. Nets are created on first
/// mention; build() validates the whole graph and freezes it.
class CircuitBuilder {
public:
  explicit CircuitBuilder(std::string name) : name_(std::move(name)) {}

  NetId net(std::string_view name);  // lookup-or-create
  void add_input(std::string_view name);
  void mark_output(std::string_view name);
  NetId add_gate(GateKind kind, std::string_view output, std::span<const std::string_view> fanin);
  NetId add_gate_ids(GateKind kind, NetId output, std::span<const NetId> fanin);

  std::size_t net_count() const { return net_names_.size(); }
  const std::string& net_name(NetId id) const { return net_names_[id]; }

  /// Validates and freezes. Throws UndefinedSignal, DuplicateDriver,
  /// CycleDetected or SyntaxError (arity).
  Circuit build() &&;

private:
  std::string name_;
  std::vector<std::string> net_names_;
  std::unordered_map<std::string, NetId> name_to_id_;
  std::vector<NetId> inputs_;
  std::vector<NetId> outputs_;
  std::vector<Gate> gates_;
  std::vector<std::uint8_t> is_input_;
};

/// Kahn topological sort over gates. Returns gate indices such that every
/// gate appears after the drivers of all its fanins. Throws CycleDetected,
/// naming one net on a cycle.
std::vector<std::uint32_t> topological_order(std::span<const Gate> gates,
                                             std::size_t net_count,
                                             const std::vector<std::string>& net_names);

/// Parses ISCAS-85 "bench" text:
///   # comment
///   INPUT(a)
///   OUTPUT(y)
///   y = NAND(a, b)
/// Identifiers are [A-Za-z0-9_]+. Gate names are case-insensitive.
Circuit parse_bench(std::string_view text, std::string name = "");
Circuit parse_bench_file(const std::filesystem::path& path);

/// Canonical re-serialization: INPUT lines, OUTPUT lines, then gates in
/// topological order. parse_bench(write_bench(c)) is name-isomorphic to c,
/// and write_bench is a fixpoint after one round trip, which makes the
/// canonical text a stable input for circuit hashing.
std::string write_bench(const Circuit& circuit);

/// Graph dump for external tooling: nets with ids/names/depths, gates with
/// kind and fanin ids, input/output lists. Returns serialized JSON.
std::string circuit_to_json(const Circuit& circuit);

}  // namespace htwb
