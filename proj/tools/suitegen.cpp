#include "suitegen.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "htwb/netlist.hpp"
#include "htwb/rng.hpp"

namespace htwb::suitegen {

namespace {

/// Builds one stand-in. The probability engineering rests on three facts:
///   - "tokens" (unconsumed primary inputs and washed unit outputs) are
///     balanced and have pairwise disjoint input support, so any gate fed
///     exclusively from fresh tokens has an exactly computable one-probability;
///   - NOT/BUFF preserve a net's activity no matter how correlated the source
///     is, so bulk fan trees cannot create new rare nets;
///   - XORing anything with a fresh token yields an exactly balanced net (the
///     token acts as a one-time pad), so every prefix of the collector chain
///     is balanced even though its members are arbitrarily correlated.
/// Consequence: the cluster heads are the only nets with activity below 1/8.
class StandinBuilder {
public:
  explicit StandinBuilder(const StandinSpec& spec)
      : spec_(spec), builder_(spec.name), rng_(spec.seed) {}

  std::string build() {
    make_inputs();
    make_heads();
    make_units();
    make_fans();
    make_collector();
    return write_bench(std::move(builder_).build());
  }

private:
  std::string next_name() { return "N" + std::to_string(++name_counter_); }

  void consume(NetId id) {
    if (!consumed_[id]) {
      consumed_[id] = 1;
      --danglers_;
    }
  }

  NetId fresh_gate(GateKind kind, const std::vector<NetId>& fanin) {
    for (const NetId f : fanin) consume(f);
    const NetId out = builder_.net(next_name());
    builder_.add_gate_ids(kind, out, fanin);
    consumed_.push_back(0);
    ++danglers_;
    ++gate_count_;
    return out;
  }

  /// Removes a random pool entry. The caller owns its single consumption.
  NetId take_token() {
    assert(!pool_.empty());
    const std::size_t k = rng_.next_below(pool_.size());
    std::swap(pool_[k], pool_.back());
    const NetId id = pool_.back();
    pool_.pop_back();
    return id;
  }

  /// Gates already placed plus the collector chain the danglers will cost.
  std::size_t projected() const { return gate_count_ + danglers_ - 1; }

  void make_inputs() {
    for (std::size_t i = 0; i < spec_.n_inputs; ++i) {
      const std::string name = next_name();
      builder_.add_input(name);
      pool_.push_back(builder_.net(name));
      consumed_.push_back(0);
      ++danglers_;
    }
    sources_ = pool_;
  }

  void make_heads() {
    NetId s1 = kNoNet, s2 = kNoNet;
    if (spec_.style != HeadStyle::FlatDisjoint) {
      s1 = take_token();
      s2 = take_token();
    }
    for (std::size_t k = 0; k < spec_.head_count; ++k) {
      NetId head = kNoNet;
      switch (spec_.style) {
        case HeadStyle::FlatDisjoint:
          head = fresh_gate(GateKind::And,
                            {take_token(), take_token(), take_token(), take_token()});
          break;
        case HeadStyle::FlatShared:
          head = fresh_gate(GateKind::And, {s1, s2, take_token(), take_token()});
          break;
        case HeadStyle::NestedShared: {
          // p: AND 1/4 -> OR 5/8 -> AND 5/16 -> head 5/64.
          const NetId fg = fresh_gate(GateKind::And, {take_token(), take_token()});
          const NetId eo = fresh_gate(GateKind::Or, {take_token(), fg});
          const NetId o = fresh_gate(GateKind::And, {take_token(), eo});
          sources_.push_back(fg);
          sources_.push_back(eo);
          sources_.push_back(o);
          head = fresh_gate(GateKind::And, {s1, s2, o});
          break;
        }
      }
      heads_.push_back(head);  // never a source, never pooled: stays rare
    }
  }

  /// Token-fed gate pairs for kind diversity. Conjunctive intermediates sit
  /// at activity 1/4 (1/8 for the three-input one) and are washed back to
  /// balance before re-entering the pool.
  void make_units() {
    const std::size_t budget = std::max<std::size_t>(4, spec_.target_gates / 8);
    std::size_t spent = 0;
    while (spent < budget) {
      const std::uint64_t kind = rng_.next_below(8);
      if (kind < 4 && pool_.size() >= 4) {
        static constexpr GateKind first[4] = {GateKind::And, GateKind::Nand, GateKind::Or,
                                              GateKind::Nor};
        const NetId t = fresh_gate(first[kind], {take_token(), take_token()});
        const NetId u = fresh_gate(kind % 2 ? GateKind::Xnor : GateKind::Xor, {t, take_token()});
        sources_.push_back(t);
        sources_.push_back(u);
        pool_.push_back(u);
        spent += 2;
      } else if (kind == 4 && pool_.size() >= 5) {
        const NetId t = fresh_gate(GateKind::And, {take_token(), take_token(), take_token()});
        const NetId u = fresh_gate(GateKind::Xor, {t, take_token()});
        sources_.push_back(t);
        sources_.push_back(u);
        pool_.push_back(u);
        spent += 2;
      } else {
        const NetId u = fresh_gate(kind % 2 ? GateKind::Buff : GateKind::Not, {take_token()});
        sources_.push_back(u);
        pool_.push_back(u);
        spent += 1;
      }
    }
  }

  /// Inverter/buffer trees over arbitrary existing nets. Reading an already
  /// consumed net adds fanout; reading a dangler extends a chain.
  void make_fans() {
    while (projected() < spec_.target_gates) {
      const NetId src = sources_[rng_.next_below(sources_.size())];
      const GateKind kind = rng_.next_below(4) ? GateKind::Not : GateKind::Buff;
      sources_.push_back(fresh_gate(kind, {src}));
    }
  }

  /// One XOR chain absorbs every dangling net (heads included), so every net
  /// reaches a primary output through XOR gates only. Outputs are the chain
  /// end plus evenly spaced taps.
  void make_collector() {
    const NetId start = take_token();
    std::vector<NetId> members;
    for (NetId id = 0; id < consumed_.size(); ++id) {
      if (!consumed_[id] && id != start) members.push_back(id);
    }
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[rng_.next_below(i)]);

    std::vector<NetId> chain;
    NetId running = start;
    for (const NetId m : members) {
      running = fresh_gate(GateKind::Xor, {running, m});
      chain.push_back(running);
    }
    if (chain.size() < spec_.n_outputs)
      throw std::logic_error("stand-in spec leaves too few chain taps for its outputs");
    for (std::size_t j = 1; j <= spec_.n_outputs; ++j)
      builder_.mark_output(builder_.net_name(chain[j * chain.size() / spec_.n_outputs - 1]));
  }

  StandinSpec spec_;
  CircuitBuilder builder_;
  SplitMix64 rng_;
  std::vector<NetId> pool_;            // balanced, support-disjoint, unconsumed
  std::vector<NetId> sources_;         // fan-tree candidates (activity >= 1/8)
  std::vector<NetId> heads_;
  std::vector<std::uint8_t> consumed_; // indexed by NetId (creation order)
  std::size_t danglers_ = 0;
  std::size_t gate_count_ = 0;
  std::size_t name_counter_ = 0;
};

// Authentic c17 (five NAND gates); the one real circuit in the suite.
constexpr const char* kC17 = R"(# c17
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

}  // namespace

std::string make_standin(const StandinSpec& spec) { return StandinBuilder(spec).build(); }

std::string make_multiplier(std::size_t bits, const std::string& name) {
  if (bits < 2) throw std::invalid_argument("multiplier needs at least 2 bits");
  CircuitBuilder b(name);
  const std::size_t n = bits;

  std::vector<NetId> a(n), bb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string nm = "A" + std::to_string(i);
    b.add_input(nm);
    a[i] = b.net(nm);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string nm = "B" + std::to_string(i);
    b.add_input(nm);
    bb[i] = b.net(nm);
  }

  const auto gate = [&](GateKind kind, const std::string& nm, std::vector<NetId> fanin) {
    const NetId out = b.net(nm);
    b.add_gate_ids(kind, out, fanin);
    return out;
  };

  std::vector<std::vector<NetId>> pp(n, std::vector<NetId>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      pp[i][j] = gate(GateKind::And, "PP" + std::to_string(i) + "_" + std::to_string(j),
                      {a[j], bb[i]});

  // Row-by-row ripple accumulation. After row i the running sum holds product
  // weights i..i+n-1 and bit i is final; ctop is the row's carry-out.
  const auto half = [&](const std::string& base, NetId x, NetId y) {
    const NetId s = gate(GateKind::Xor, base + "_s", {x, y});
    const NetId c = gate(GateKind::And, base + "_c", {x, y});
    return std::pair<NetId, NetId>{s, c};
  };
  const auto full = [&](const std::string& base, NetId x, NetId y, NetId z) {
    const NetId t = gate(GateKind::Xor, base + "_t", {x, y});
    const NetId s = gate(GateKind::Xor, base + "_s", {t, z});
    const NetId u = gate(GateKind::And, base + "_u", {x, y});
    const NetId v = gate(GateKind::And, base + "_v", {t, z});
    const NetId c = gate(GateKind::Or, base + "_c", {u, v});
    return std::pair<NetId, NetId>{s, c};
  };

  std::vector<NetId> row = pp[0];
  NetId ctop = kNoNet;
  std::vector<NetId> product;
  product.push_back(row[0]);
  for (std::size_t i = 1; i < n; ++i) {
    std::vector<NetId> next(n);
    NetId carry = kNoNet;
    for (std::size_t j = 0; j < n; ++j) {
      const std::string base = "R" + std::to_string(i) + "_" + std::to_string(j);
      const NetId addend = j + 1 < n ? row[j + 1] : ctop;  // kNoNet in row 1
      if (carry == kNoNet) {
        std::tie(next[j], carry) = half(base, pp[i][j], addend);
      } else if (addend == kNoNet) {
        std::tie(next[j], carry) = half(base, pp[i][j], carry);
      } else {
        std::tie(next[j], carry) = full(base, pp[i][j], addend, carry);
      }
    }
    ctop = carry;
    row = std::move(next);
    product.push_back(row[0]);
  }
  for (std::size_t j = 1; j < n; ++j) product.push_back(row[j]);
  product.push_back(ctop);

  for (std::size_t k = 0; k < product.size(); ++k) {
    const std::string nm = "P" + std::to_string(k);
    gate(GateKind::Buff, nm, {product[k]});
    b.mark_output(nm);
  }
  return write_bench(std::move(b).build());
}

std::vector<SuiteFile> generate_suite() {
  std::vector<SuiteFile> out;
  out.push_back({"c17.bench", kC17});
  const StandinSpec specs[] = {
      {"c432_slot", 36, 7, 160, 8, HeadStyle::NestedShared, 0xC432},
      {"c880_slot", 60, 26, 383, 8, HeadStyle::FlatDisjoint, 0x880},
      {"c1355_slot", 41, 32, 546, 8, HeadStyle::FlatDisjoint, 0x1355},
      {"c1908_slot", 33, 25, 880, 8, HeadStyle::FlatShared, 0x1908},
      {"c3540_slot", 50, 22, 1669, 12, HeadStyle::FlatShared, 0x3540},
  };
  for (const StandinSpec& spec : specs)
    out.push_back({"synth85/" + spec.name + ".bench", make_standin(spec)});
  out.push_back({"synth85/c6288_slot.bench", make_multiplier(16, "c6288_slot")});
  return out;
}

}  // namespace htwb::suitegen
