#include "htwb/htgen.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "htwb/artifact.hpp"
#include "htwb/rng.hpp"

namespace htwb {

namespace {

// Nets with a path to at least one primary output (walking fanin edges
// backwards from the outputs).
std::vector<std::uint8_t> reaches_output(const Circuit& circuit) {
  std::vector<std::uint8_t> mark(circuit.net_count(), 0);
  std::vector<NetId> stack;
  for (const NetId o : circuit.primary_outputs()) {
    if (!mark[o]) {
      mark[o] = 1;
      stack.push_back(o);
    }
  }
  while (!stack.empty()) {
    const NetId net = stack.back();
    stack.pop_back();
    const std::int32_t g = circuit.driver_gate(net);
    if (g < 0) continue;
    for (const NetId f : circuit.gates()[g].fanin) {
      if (!mark[f]) {
        mark[f] = 1;
        stack.push_back(f);
      }
    }
  }
  return mark;
}

// Transitive fanin cone of a set of nets, including the nets themselves.
std::vector<std::uint8_t> fanin_cone(const Circuit& circuit, std::span<const NetId> roots) {
  std::vector<std::uint8_t> mark(circuit.net_count(), 0);
  std::vector<NetId> stack;
  for (const NetId r : roots) {
    if (!mark[r]) {
      mark[r] = 1;
      stack.push_back(r);
    }
  }
  while (!stack.empty()) {
    const NetId net = stack.back();
    stack.pop_back();
    const std::int32_t g = circuit.driver_gate(net);
    if (g < 0) continue;
    for (const NetId f : circuit.gates()[g].fanin) {
      if (!mark[f]) {
        mark[f] = 1;
        stack.push_back(f);
      }
    }
  }
  return mark;
}

void validate_spec(const Circuit& circuit, const TrojanSpec& spec) {
  const std::size_t w = spec.trigger_nets.size();
  if (w < kMinTriggerWidth || w > kMaxTriggerWidth)
    throw InvalidSpec("trigger width " + std::to_string(w) + " outside [" +
                      std::to_string(kMinTriggerWidth) + ", " + std::to_string(kMaxTriggerWidth) +
                      "]");
  if (spec.trigger_values.size() != w)
    throw InvalidSpec("trigger has " + std::to_string(w) + " nets but " +
                      std::to_string(spec.trigger_values.size()) + " values");
  std::set<NetId> distinct(spec.trigger_nets.begin(), spec.trigger_nets.end());
  if (distinct.size() != w) throw InvalidSpec("duplicate trigger nets");
  for (const NetId t : spec.trigger_nets)
    if (t >= circuit.net_count()) throw InvalidSpec("trigger net id out of range");
  if (spec.victim >= circuit.net_count()) throw InvalidSpec("victim net id out of range");
  if (distinct.count(spec.victim)) throw InvalidSpec("victim is a trigger net");
  if (circuit.is_primary_input(spec.victim))
    throw InvalidSpec("victim is a primary input: " + circuit.net_name(spec.victim));
}

}  // namespace

bool trigger_fires(const TrojanSpec& spec, std::span<const std::uint8_t> net_values) {
  for (std::size_t k = 0; k < spec.trigger_nets.size(); ++k)
    if (net_values[spec.trigger_nets[k]] != spec.trigger_values[k]) return false;
  return true;
}

InfectedCircuit insert_trojan(const Circuit& circuit, const TrojanSpec& spec) {
  validate_spec(circuit, spec);

  if (!reaches_output(circuit)[spec.victim])
    throw VictimUnreachable(circuit.net_name(spec.victim));

  // A trigger net downstream of the victim would loop through the payload.
  {
    std::vector<std::uint8_t> seen(circuit.net_count(), 0);
    std::vector<NetId> stack{spec.victim};
    seen[spec.victim] = 1;
    while (!stack.empty()) {
      const NetId net = stack.back();
      stack.pop_back();
      for (const std::uint32_t g : circuit.fanout_gates(net)) {
        const NetId out = circuit.gates()[g].output;
        if (seen[out]) continue;
        seen[out] = 1;
        stack.push_back(out);
      }
    }
    for (const NetId t : spec.trigger_nets)
      if (seen[t] && t != spec.victim)
        throw CycleWouldForm("trigger net " + circuit.net_name(t) + " is in the fanout of victim " +
                             circuit.net_name(spec.victim));
  }

  // Fresh names that cannot collide with parent nets.
  const auto fresh = [&circuit](std::string base) {
    std::string name = base;
    for (int k = 0; circuit.find_net(name); ++k) name = base + "_" + std::to_string(k);
    return name;
  };
  const std::string& victim_name = circuit.net_name(spec.victim);
  const std::string raw_name = fresh(victim_name + "_ht_raw");
  const std::string trigger_name = fresh("ht_trigger");

  CircuitBuilder builder(circuit.name() + (spec.id.empty() ? "_ht" : "_" + spec.id));
  for (const NetId i : circuit.primary_inputs()) builder.add_input(circuit.net_name(i));
  for (const NetId o : circuit.primary_outputs()) builder.mark_output(circuit.net_name(o));

  const std::int32_t victim_driver = circuit.driver_gate(spec.victim);
  std::vector<std::string_view> names;
  for (const std::uint32_t gi : circuit.topo_order()) {
    const Gate& g = circuit.gates()[gi];
    names.clear();
    for (const NetId f : g.fanin) names.push_back(circuit.net_name(f));
    const std::string& out =
        static_cast<std::int32_t>(gi) == victim_driver ? raw_name : circuit.net_name(g.output);
    builder.add_gate(g.kind, out, names);
  }

  std::vector<std::string> literal_names;
  literal_names.reserve(spec.trigger_nets.size());
  for (std::size_t k = 0; k < spec.trigger_nets.size(); ++k) {
    const std::string& net = circuit.net_name(spec.trigger_nets[k]);
    if (spec.trigger_values[k]) {
      literal_names.push_back(net);
    } else {
      std::string inv = fresh("ht_inv_" + std::to_string(k));
      const std::string_view in[] = {net};
      builder.add_gate(GateKind::Not, inv, in);
      literal_names.push_back(std::move(inv));
    }
  }
  names.assign(literal_names.begin(), literal_names.end());
  builder.add_gate(GateKind::And, trigger_name, names);

  const std::string_view payload_in[] = {raw_name, trigger_name};
  builder.add_gate(GateKind::Xor, victim_name, payload_in);

  InfectedCircuit infected;
  infected.circuit = std::move(builder).build();
  infected.spec = spec;
  infected.parent_name = circuit.name();
  return infected;
}

std::vector<InfectedCircuit> generate_corpus(const Circuit& circuit, const RareNetSet& rare,
                                             const CorpusConfig& cfg, std::uint64_t seed) {
  const std::size_t m = rare.size();
  for (const std::size_t w : cfg.widths) {
    if (w < kMinTriggerWidth || w > kMaxTriggerWidth)
      throw InvalidSpec("corpus width " + std::to_string(w) + " outside supported range");
    if (m < w) throw InsufficientRareNets(m, w);
  }

  // Profiling pass: per rare member, its packed value column over the whole
  // campaign. Trigger-fire fractions and campaign witnesses come from these.
  const std::uint64_t total_words = (cfg.profile_patterns + 63) / 64;
  std::vector<std::vector<std::uint64_t>> member_rows(m);
  for (auto& row : member_rows) row.reserve(total_words);
  random_campaign_scan(circuit, cfg.profile_patterns, cfg.profile_seed,
                       [&](const ValueTable& table, std::uint64_t) {
                         for (std::size_t k = 0; k < m; ++k) {
                           const auto row = table.row(rare.members[k].net);
                           member_rows[k].insert(member_rows[k].end(), row.begin(), row.end());
                         }
                       });

  const std::vector<std::uint8_t> reachable = reaches_output(circuit);
  std::vector<NetId> victim_pool;
  for (NetId id = 0; id < circuit.net_count(); ++id)
    if (reachable[id] && !circuit.is_primary_input(id)) victim_pool.push_back(id);
  if (victim_pool.empty()) throw VictimUnreachable("no net reaches an output");

  // PI support per net: which inputs can influence it (packed over inputs).
  const std::size_t n_pi = circuit.primary_inputs().size();
  const std::size_t pi_words = (n_pi + 63) / 64;
  std::vector<std::uint64_t> support(circuit.net_count() * pi_words, 0);
  for (std::size_t i = 0; i < n_pi; ++i) {
    const NetId pi = circuit.primary_inputs()[i];
    support[pi * pi_words + i / 64] |= std::uint64_t{1} << (i % 64);
  }
  for (const std::uint32_t gi : circuit.topo_order()) {
    const Gate& g = circuit.gates()[gi];
    std::uint64_t* out = support.data() + g.output * pi_words;
    for (const NetId f : g.fanin) {
      const std::uint64_t* in = support.data() + f * pi_words;
      for (std::size_t w = 0; w < pi_words; ++w) out[w] |= in[w];
    }
  }

  SplitMix64 rng(mix_seed(seed, 0x7C));
  std::vector<InfectedCircuit> corpus;
  std::set<std::vector<NetId>> emitted;  // sorted trigger nets + victim

  for (const std::size_t width : cfg.widths) {
    std::size_t produced = 0;
    std::size_t attempts = 0;
    const std::size_t budget = cfg.attempts_per_trojan * cfg.per_width;

    while (produced < cfg.per_width) {
      if (++attempts > budget)
        throw RejectionBudgetExhausted("width " + std::to_string(width) + ": " +
                                       std::to_string(produced) + "/" +
                                       std::to_string(cfg.per_width) + " after " +
                                       std::to_string(attempts - 1) + " attempts");

      // Draw `width` distinct rare members.
      std::vector<std::size_t> picks;
      while (picks.size() < width) {
        const std::size_t c = static_cast<std::size_t>(rng.next_below(m));
        if (std::find(picks.begin(), picks.end(), c) == picks.end()) picks.push_back(c);
      }

      TrojanSpec spec;
      spec.trigger_nets.reserve(width);
      spec.trigger_values.reserve(width);
      for (const std::size_t k : picks) {
        spec.trigger_nets.push_back(rare.members[k].net);
        spec.trigger_values.push_back(rare.members[k].rare_value);
      }

      // Fire statistics over the profiling campaign.
      std::uint64_t fire_count = 0;
      std::uint64_t first_fire = ~std::uint64_t{0};
      {
        const std::size_t tail_bits = cfg.profile_patterns & 63;
        const std::uint64_t tail_mask =
            tail_bits ? ((std::uint64_t{1} << tail_bits) - 1) : ~std::uint64_t{0};
        for (std::uint64_t w = 0; w < total_words; ++w) {
          std::uint64_t fire = w + 1 == total_words ? tail_mask : ~std::uint64_t{0};
          for (std::size_t j = 0; j < width; ++j) {
            const std::uint64_t col = member_rows[picks[j]][w];
            fire &= spec.trigger_values[j] ? col : ~col;
          }
          fire_count += std::popcount(fire);
          if (fire && first_fire == ~std::uint64_t{0})
            first_fire = w * 64 + static_cast<std::uint64_t>(std::countr_zero(fire));
        }
      }
      if (cfg.profile_patterns &&
          static_cast<double>(fire_count) >
              cfg.max_fire_fraction * static_cast<double>(cfg.profile_patterns))
        continue;  // fires too often to be a stealthy trigger

      // Witness: campaign hit, else exhaustive search over the trigger cone.
      std::optional<Pattern> witness;
      if (fire_count > 0) {
        witness = campaign_pattern(circuit, cfg.profile_seed, first_fire);
      } else {
        std::vector<std::size_t> cone_inputs;
        for (std::size_t i = 0; i < n_pi; ++i) {
          bool in_cone = false;
          for (const std::size_t k : picks) {
            const std::uint64_t* sup = support.data() + rare.members[k].net * pi_words;
            if ((sup[i / 64] >> (i % 64)) & 1u) {
              in_cone = true;
              break;
            }
          }
          if (in_cone) cone_inputs.push_back(i);
        }
        if (cone_inputs.size() > cfg.cone_input_limit) continue;

        const std::uint64_t space = std::uint64_t{1} << cone_inputs.size();
        constexpr std::uint64_t kBlock = 8192;
        std::vector<Pattern> block;
        for (std::uint64_t base = 0; base < space && !witness; base += kBlock) {
          const std::uint64_t nblk = std::min(kBlock, space - base);
          block.assign(nblk, Pattern{std::vector<std::uint8_t>(n_pi, 0)});
          for (std::uint64_t j = 0; j < nblk; ++j)
            for (std::size_t b = 0; b < cone_inputs.size(); ++b)
              block[j].bits[cone_inputs[b]] = ((base + j) >> b) & 1u;
          const ValueTable table = evaluate(circuit, block);
          for (std::uint64_t j = 0; j < nblk && !witness; ++j) {
            bool fires = true;
            for (std::size_t k = 0; k < width && fires; ++k)
              fires = table.get(spec.trigger_nets[k], j) == (spec.trigger_values[k] != 0);
            if (fires) witness = block[j];
          }
        }
        if (!witness) continue;  // provably untriggerable combination
      }

      // Victim: output-reaching net outside the trigger's fanin cones (the
      // payload XOR must not feed back into its own trigger).
      const std::vector<std::uint8_t> forbidden = fanin_cone(circuit, spec.trigger_nets);
      NetId victim = kNoNet;
      for (int tries = 0; tries < 64; ++tries) {
        const NetId v = victim_pool[rng.next_below(victim_pool.size())];
        if (!forbidden[v]) {
          victim = v;
          break;
        }
      }
      if (victim == kNoNet) continue;
      spec.victim = victim;

      std::vector<NetId> key(spec.trigger_nets);
      std::sort(key.begin(), key.end());
      key.push_back(victim);
      if (!emitted.insert(key).second) continue;  // duplicate trojan

      spec.id = "w" + std::to_string(width) + "_" + std::to_string(produced);

      // The witness must actually fire the trigger; a failure here would
      // mean the campaign indexing and the simulator disagree.
      if (!trigger_fires(spec, evaluate_single(circuit, *witness)))
        throw Error("internal: witness does not fire trigger " + spec.id);

      InfectedCircuit infected = insert_trojan(circuit, spec);
      infected.witness = std::move(witness);
      corpus.push_back(std::move(infected));
      ++produced;
    }
  }
  return corpus;
}

std::string write_corpus(const std::filesystem::path& dir, const Circuit& parent,
                         std::span<const InfectedCircuit> corpus, const std::string& config_hash) {
  std::filesystem::create_directories(dir);

  nlohmann::json trojans = nlohmann::json::array();
  for (const InfectedCircuit& inf : corpus) {
    const std::string bench_name = parent.name() + "_" + inf.spec.id + ".bench";
    write_text_file(dir / bench_name, write_bench(inf.circuit));

    nlohmann::json trigger = nlohmann::json::array();
    for (std::size_t k = 0; k < inf.spec.trigger_nets.size(); ++k)
      trigger.push_back({{"net", parent.net_name(inf.spec.trigger_nets[k])},
                         {"value", inf.spec.trigger_values[k]}});
    trojans.push_back({{"id", inf.spec.id},
                       {"width", inf.spec.trigger_nets.size()},
                       {"trigger", trigger},
                       {"victim", parent.net_name(inf.spec.victim)},
                       {"witness", inf.witness ? inf.witness->to_string() : ""},
                       {"bench", bench_name}});
  }

  const nlohmann::json manifest = {{"artifact", "ht_corpus"},
                                   {"version", 1},
                                   {"parent", parent.name()},
                                   {"parent_hash", circuit_hash(parent)},
                                   {"config_hash", config_hash},
                                   {"trojans", trojans}};
  const std::string text = manifest.dump(2);
  write_text_file(dir / "manifest.json", text);
  return text;
}

std::vector<InfectedCircuit> read_corpus(const std::filesystem::path& dir, const Circuit& parent) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad corpus manifest: " + std::string(e.what()));
  }

  const std::string recorded = manifest.at("parent_hash").get<std::string>();
  const std::string actual = circuit_hash(parent);
  if (recorded != actual)
    throw StaleArtifact("corpus was generated from circuit " + recorded + ", got " + actual);

  std::vector<InfectedCircuit> corpus;
  for (const auto& entry : manifest.at("trojans")) {
    InfectedCircuit inf;
    inf.parent_name = parent.name();
    inf.circuit = parse_bench_file(dir / entry.at("bench").get<std::string>());
    inf.spec.id = entry.at("id").get<std::string>();
    for (const auto& lit : entry.at("trigger")) {
      const std::string net = lit.at("net").get<std::string>();
      const auto id = parent.find_net(net);
      if (!id) throw UndefinedSignal(net);
      inf.spec.trigger_nets.push_back(*id);
      inf.spec.trigger_values.push_back(lit.at("value").get<std::uint8_t>());
    }
    const std::string victim = entry.at("victim").get<std::string>();
    const auto vid = parent.find_net(victim);
    if (!vid) throw UndefinedSignal(victim);
    inf.spec.victim = *vid;
    const std::string witness = entry.at("witness").get<std::string>();
    if (!witness.empty()) inf.witness = Pattern::from_string(witness);
    corpus.push_back(std::move(inf));
  }
  return corpus;
}

}  // namespace htwb
