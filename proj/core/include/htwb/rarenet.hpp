#pragma once

#include <string>
#include <vector>

#include "htwb/logicsim.hpp"
#include "htwb/testability.hpp"

namespace htwb {

class ThetaOutOfRange : public Error {
public:
  explicit ThetaOutOfRange(double value)
      : Error("activity threshold must lie in (0, 0.5], got " + std::to_string(value)) {}
};

class EtaOutOfRange : public Error {
public:
  explicit EtaOutOfRange(double value)
      : Error("imbalance threshold must lie in [0, 1), got " + std::to_string(value)) {}
};

enum class RareCriterion : std::uint8_t { Dynamic, Controllability };

std::string_view to_string(RareCriterion c);

struct RareNet {
  NetId net = kNoNet;
  std::uint8_t rare_value = 0;  // the value this net seldom takes
  /// Dynamic: switching activity (smaller = rarer).
  /// Controllability: imbalance ratio (larger = rarer).
  double rarity = 0.0;
};

/// Result of rare-net selection. Members are sorted by NetId; the order
/// defines the RL observation layout, so it must be stable across runs.
struct RareNetSet {
  RareCriterion criterion = RareCriterion::Dynamic;
  double threshold = 0.0;
  std::vector<RareNet> members;

  std::size_t size() const { return members.size(); }
  bool contains(NetId id) const;
};

/// Nets with switching activity strictly below `theta`. Primary inputs are
/// never selected (they are stimulus, not logic). Throws ThetaOutOfRange
/// unless 0 < theta <= 0.5.
RareNetSet find_rare_dynamic(const Circuit& circuit, const SwitchingStats& stats, double theta);

/// Nets with controllability imbalance strictly above `threshold`. Primary
/// inputs are never selected. Throws EtaOutOfRange unless 0 <= threshold < 1.
RareNetSet find_rare_controllability(const Circuit& circuit, const ControllabilityTable& table,
                                     double threshold);

/// Collapses directly connected rare nets: two members are connected when
/// one drives a gate whose output is the other. Within each weakly-connected
/// component only the rarest member survives (smallest activity for Dynamic,
/// largest imbalance for Controllability; ties keep the smallest NetId).
/// Rare chains carry almost no extra trigger information, and dropping them
/// keeps the RL observation compact.
RareNetSet prune_chains(const RareNetSet& set, const Circuit& circuit);

/// Serialized JSON: criterion, threshold, members keyed by net name.
std::string rare_to_json(const Circuit& circuit, const RareNetSet& set);

}  // namespace htwb
