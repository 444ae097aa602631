#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "htwb/logicsim.hpp"
#include "htwb/netlist.hpp"
#include "htwb/rarenet.hpp"

namespace htwb {

/// Inserting the payload would create a combinational loop (a trigger net
/// lies in the victim's transitive fanout).
class CycleWouldForm : public Error {
public:
  explicit CycleWouldForm(const std::string& detail)
      : Error("payload would form a cycle: " + detail) {}
};

/// The chosen victim net has no path to any primary output, so the payload
/// could never be observed.
class VictimUnreachable : public Error {
public:
  explicit VictimUnreachable(const std::string& net)
      : Error("victim net cannot reach any output: " + net) {}
};

/// Structurally invalid trojan description (width, duplicates, victim
/// overlapping the trigger, ...).
class InvalidSpec : public Error {
public:
  explicit InvalidSpec(const std::string& detail) : Error("invalid trojan spec: " + detail) {}
};

/// The rare-net set is smaller than the requested trigger width.
class InsufficientRareNets : public Error {
public:
  InsufficientRareNets(std::size_t have, std::size_t need)
      : Error("need " + std::to_string(need) + " rare nets, have " + std::to_string(have)) {}
};

/// Candidate sampling could not produce the requested corpus within the
/// attempt budget (triggers kept firing too often or never provably fired).
class RejectionBudgetExhausted : public Error {
public:
  explicit RejectionBudgetExhausted(const std::string& detail)
      : Error("trojan sampling budget exhausted: " + detail) {}
};

/// Trigger condition plus payload target, in parent-circuit net ids.
/// The trigger fires when every trigger net carries its listed value.
struct TrojanSpec {
  std::string id;
  std::vector<NetId> trigger_nets;         // 2..5 distinct nets
  std::vector<std::uint8_t> trigger_values;
  NetId victim = kNoNet;
};

inline constexpr std::size_t kMinTriggerWidth = 2;
inline constexpr std::size_t kMaxTriggerWidth = 5;

/// Infected copy of a parent circuit. Net ids in `spec` refer to the parent;
/// the infected circuit re-densifies ids but keeps every parent net name, so
/// lookups by name bridge the two.
struct InfectedCircuit {
  Circuit circuit;
  TrojanSpec spec;
  std::string parent_name;
  std::optional<Pattern> witness;  // input proving the trigger can fire
};

/// Splices a trigger AND-tree and a payload XOR into a copy of the circuit.
/// The victim keeps its name: its original driver is redirected to
/// "<victim>_ht_raw" and an XOR of that raw signal with the trigger output
/// drives the victim, so downstream consumers and output lists are
/// untouched. While the trigger is idle the XOR is transparent and the
/// infected circuit computes exactly the parent function.
InfectedCircuit insert_trojan(const Circuit& circuit, const TrojanSpec& spec);

/// True iff the trigger condition holds for the given net values
/// (values indexed by parent-circuit NetId).
bool trigger_fires(const TrojanSpec& spec, std::span<const std::uint8_t> net_values);

struct CorpusConfig {
  std::vector<std::size_t> widths{2, 3, 4, 5};
  std::size_t per_width = 20;
  /// Reject triggers firing on more than this fraction of profiling
  /// patterns; such "trojans" are not stealthy and pollute the benchmark.
  double max_fire_fraction = 0.05;
  std::uint64_t profile_patterns = 100'000;
  std::uint64_t profile_seed = 1;
  /// Exhaustive witness search is attempted when the trigger cone spans at
  /// most this many primary inputs.
  std::size_t cone_input_limit = 20;
  /// Sampling attempts allowed per requested trojan before giving up.
  std::size_t attempts_per_trojan = 200;
};

/// Samples trojan corpora per trigger width. Trigger nets are drawn from the
/// rare set (at their rare values); victims are sampled from output-reaching
/// non-input nets outside the trigger's fanin cones. Every emitted trojan
/// carries a concrete witness pattern: either a profiling pattern that fired
/// the trigger, or one found by exhaustive search over the trigger cone's
/// inputs. Candidates whose trigger cannot be proven fireable are rejected.
std::vector<InfectedCircuit> generate_corpus(const Circuit& circuit, const RareNetSet& rare,
                                             const CorpusConfig& cfg, std::uint64_t seed);

/// Writes bench files plus a manifest (JSON) describing each trojan by net
/// name, its witness and the parent circuit hash. Returns the manifest text.
std::string write_corpus(const std::filesystem::path& dir, const Circuit& parent,
                         std::span<const InfectedCircuit> corpus, const std::string& config_hash);

/// Reloads a corpus written by write_corpus. Verifies the manifest's parent
/// hash against the given parent circuit (StaleArtifact on mismatch) and
/// re-resolves net names to ids.
std::vector<InfectedCircuit> read_corpus(const std::filesystem::path& dir, const Circuit& parent);

}  // namespace htwb
