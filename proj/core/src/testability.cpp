#include "htwb/testability.hpp"

#include <cmath>
#include <utility>

#include <nlohmann/json.hpp>

namespace htwb {

namespace {

using CcPair = std::pair<ControlValue, ControlValue>;  // (cc0, cc1)

CcPair xor2(const CcPair& a, const CcPair& b) {
  ControlValue cc1 = std::min(a.first + b.second, a.second + b.first) + 1;
  ControlValue cc0 = std::min(a.first + b.first, a.second + b.second) + 1;
  return {std::move(cc0), std::move(cc1)};
}

}  // namespace

ControllabilityTable compute_controllability(const Circuit& circuit) {
  ControllabilityTable t;
  t.cc0.assign(circuit.net_count(), 0);
  t.cc1.assign(circuit.net_count(), 0);

  for (const NetId pi : circuit.primary_inputs()) {
    t.cc0[pi] = 1;
    t.cc1[pi] = 1;
  }

  for (const std::uint32_t gi : circuit.topo_order()) {
    const Gate& g = circuit.gates()[gi];
    ControlValue cc0, cc1;
    switch (g.kind) {
      case GateKind::And:
      case GateKind::Nand: {
        // Output 1 needs every input 1; output 0 needs the cheapest input 0.
        ControlValue all_ones = 0;
        ControlValue best_zero = t.cc0[g.fanin[0]];
        for (const NetId f : g.fanin) {
          all_ones += t.cc1[f];
          best_zero = std::min(best_zero, t.cc0[f]);
        }
        cc1 = all_ones + 1;
        cc0 = best_zero + 1;
        if (g.kind == GateKind::Nand) std::swap(cc0, cc1);
        break;
      }
      case GateKind::Or:
      case GateKind::Nor: {
        ControlValue all_zeros = 0;
        ControlValue best_one = t.cc1[g.fanin[0]];
        for (const NetId f : g.fanin) {
          all_zeros += t.cc0[f];
          best_one = std::min(best_one, t.cc1[f]);
        }
        cc0 = all_zeros + 1;
        cc1 = best_one + 1;
        if (g.kind == GateKind::Nor) std::swap(cc0, cc1);
        break;
      }
      case GateKind::Xor:
      case GateKind::Xnor: {
        CcPair acc{t.cc0[g.fanin[0]], t.cc1[g.fanin[0]]};
        for (std::size_t i = 1; i < g.fanin.size(); ++i)
          acc = xor2(acc, {t.cc0[g.fanin[i]], t.cc1[g.fanin[i]]});
        cc0 = std::move(acc.first);
        cc1 = std::move(acc.second);
        // The simulator's XNOR fold negates the parity iff the fanin count
        // is even; the swap follows the same rule so cc describes the same
        // function (the 2-input case is the classic "XNOR swaps XOR").
        if (g.kind == GateKind::Xnor && g.fanin.size() % 2 == 0) std::swap(cc0, cc1);
        break;
      }
      case GateKind::Not:
        cc0 = t.cc1[g.fanin[0]] + 1;
        cc1 = t.cc0[g.fanin[0]] + 1;
        break;
      case GateKind::Buff:
        cc0 = t.cc0[g.fanin[0]] + 1;
        cc1 = t.cc1[g.fanin[0]] + 1;
        break;
    }
    t.cc0[g.output] = std::move(cc0);
    t.cc1[g.output] = std::move(cc1);
  }

  t.imbalance.resize(circuit.net_count());
  for (NetId id = 0; id < circuit.net_count(); ++id)
    t.imbalance[id] = controllability_imbalance(t.cc0[id], t.cc1[id]);
  return t;
}

double controllability_imbalance(const ControlValue& cc0, const ControlValue& cc1) {
  if (cc0 < 1 || cc1 < 1)
    throw NonPositiveControllability("cc0=" + cc0.str() + " cc1=" + cc1.str());
  const ControlValue& hi = cc0 < cc1 ? cc1 : cc0;
  const ControlValue diff = cc0 < cc1 ? cc1 - cc0 : cc0 - cc1;
  // Exact integers up to here; one rounding division at the end. diff < hi
  // always, so the exact ratio sits strictly inside [0, 1); when the costs
  // differ by over ~2^53x the division rounds up to 1.0, so clamp back to
  // the largest double below it.
  const double ratio = diff.convert_to<double>() / hi.convert_to<double>();
  return ratio < 1.0 ? ratio : std::nextafter(1.0, 0.0);
}

std::string controllability_to_json(const Circuit& circuit, const ControllabilityTable& table) {
  nlohmann::json nets = nlohmann::json::object();
  for (NetId id = 0; id < circuit.net_count(); ++id) {
    nets[circuit.net_name(id)] = {{"cc0", table.cc0[id].str()},
                                  {"cc1", table.cc1[id].str()},
                                  {"eta", table.imbalance[id]},
                                  {"rare_value", table.rare_value(id)}};
  }
  const nlohmann::json doc = {{"circuit", circuit.name()}, {"nets", nets}};
  return doc.dump(2);
}

}  // namespace htwb
