#include "htwb/rarenet.hpp"

#include <algorithm>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace htwb {

std::string_view to_string(RareCriterion c) {
  return c == RareCriterion::Dynamic ? "dynamic" : "controllability";
}

bool RareNetSet::contains(NetId id) const {
  return std::any_of(members.begin(), members.end(),
                     [id](const RareNet& m) { return m.net == id; });
}

RareNetSet find_rare_dynamic(const Circuit& circuit, const SwitchingStats& stats, double theta) {
  if (!(theta > 0.0) || theta > 0.5) throw ThetaOutOfRange(theta);

  RareNetSet set;
  set.criterion = RareCriterion::Dynamic;
  set.threshold = theta;
  for (NetId id = 0; id < circuit.net_count(); ++id) {
    if (circuit.is_primary_input(id)) continue;
    if (stats.activity[id] < theta)
      set.members.push_back({id, stats.rare_value[id], stats.activity[id]});
  }
  return set;  // ids ascend by construction
}

RareNetSet find_rare_controllability(const Circuit& circuit, const ControllabilityTable& table,
                                     double threshold) {
  if (!(threshold >= 0.0) || threshold >= 1.0) throw EtaOutOfRange(threshold);

  RareNetSet set;
  set.criterion = RareCriterion::Controllability;
  set.threshold = threshold;
  for (NetId id = 0; id < circuit.net_count(); ++id) {
    if (circuit.is_primary_input(id)) continue;
    if (table.imbalance[id] > threshold)
      set.members.push_back({id, table.rare_value(id), table.imbalance[id]});
  }
  return set;
}

RareNetSet prune_chains(const RareNetSet& set, const Circuit& circuit) {
  const std::size_t m = set.members.size();
  std::unordered_map<NetId, std::size_t> index;
  index.reserve(m);
  for (std::size_t i = 0; i < m; ++i) index.emplace(set.members[i].net, i);

  // Union-find over members; edge = member drives a gate outputting a member.
  std::vector<std::size_t> parent(m);
  for (std::size_t i = 0; i < m; ++i) parent[i] = i;
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (std::size_t i = 0; i < m; ++i) {
    const std::int32_t g = circuit.driver_gate(set.members[i].net);
    if (g < 0) continue;
    for (const NetId f : circuit.gates()[g].fanin) {
      const auto it = index.find(f);
      if (it != index.end()) parent[find(it->second)] = find(i);
    }
  }

  // Representative per component: rarest member, NetId as tie-break. Members
  // are id-sorted, so "first wins on equal rarity" is the smallest id.
  std::unordered_map<std::size_t, std::size_t> best;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t root = find(i);
    const auto it = best.find(root);
    if (it == best.end()) {
      best.emplace(root, i);
      continue;
    }
    const double cur = set.members[it->second].rarity;
    const double cand = set.members[i].rarity;
    const bool better = set.criterion == RareCriterion::Dynamic ? cand < cur : cand > cur;
    if (better) it->second = i;
  }

  RareNetSet pruned;
  pruned.criterion = set.criterion;
  pruned.threshold = set.threshold;
  pruned.members.reserve(best.size());
  for (std::size_t i = 0; i < m; ++i) {
    const auto it = best.find(find(i));
    if (it != best.end() && it->second == i) pruned.members.push_back(set.members[i]);
  }
  return pruned;  // iteration in id order keeps members sorted
}

std::string rare_to_json(const Circuit& circuit, const RareNetSet& set) {
  nlohmann::json members = nlohmann::json::array();
  for (const RareNet& r : set.members) {
    members.push_back({{"net", circuit.net_name(r.net)},
                       {"rare_value", r.rare_value},
                       {"rarity", r.rarity}});
  }
  const nlohmann::json doc = {{"circuit", circuit.name()},
                              {"criterion", to_string(set.criterion)},
                              {"threshold", set.threshold},
                              {"members", members}};
  return doc.dump(2);
}

}  // namespace htwb
