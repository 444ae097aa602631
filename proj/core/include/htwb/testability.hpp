#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "htwb/netlist.hpp"

namespace htwb {

/// Controllability counts are exact integers. They grow roughly with 2^depth
/// through reconvergent AND/OR trees, so a fixed-width type would silently
/// saturate on deep circuits; cpp_int keeps the arithmetic exact and the
/// imbalance ratio is computed from the exact values at the end.
using ControlValue = boost::multiprecision::cpp_int;

class NonPositiveControllability : public Error {
public:
  explicit NonPositiveControllability(const std::string& detail)
      : Error("controllability must be >= 1: " + detail) {}
};

struct ControllabilityTable {
  std::vector<ControlValue> cc0;   // per net: cost of forcing 0
  std::vector<ControlValue> cc1;   // per net: cost of forcing 1
  std::vector<double> imbalance;   // per net: |cc1-cc0| / max(cc0,cc1), in [0,1)

  /// Harder-to-set value of the net: 1 if cc1 > cc0, else 0 (ties lean 0).
  std::uint8_t rare_value(NetId id) const { return cc1[id] > cc0[id] ? 1 : 0; }
};

/// Combinational SCOAP controllability. Primary inputs cost 1 for either
/// value; every gate adds 1 for the traversal. Multi-input XOR/XNOR are
/// folded left two at a time with one traversal increment per fold, matching
/// the simulator's gate semantics.
ControllabilityTable compute_controllability(const Circuit& circuit);

/// Imbalance ratio |cc1-cc0| / max(cc0,cc1). Throws
/// NonPositiveControllability unless both inputs are >= 1, which also bounds
/// the result to [0, 1).
double controllability_imbalance(const ControlValue& cc0, const ControlValue& cc1);

/// Per-net controllability report as serialized JSON keyed by net name.
/// cc values are emitted as decimal strings (they can exceed 2^64).
std::string controllability_to_json(const Circuit& circuit, const ControllabilityTable& table);

}  // namespace htwb
