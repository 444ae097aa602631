#include <doctest.h>

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "htwb/netlist.hpp"
#include "testutil.hpp"

using namespace htwb;

TEST_SUITE_BEGIN("netlist");

TEST_CASE("parses the classic five-input two-output netlist") {
  const Circuit c = parse_bench(testutil::kC17Text, "c17");
  CHECK(c.name() == "c17");
  CHECK(c.primary_inputs().size() == 5);
  CHECK(c.primary_outputs().size() == 2);
  CHECK(c.gate_count() == 6);
  CHECK(c.net_count() == 11);

  // First-mention order assigns dense ids.
  CHECK(c.net_name(0) == "1");
  CHECK(c.net_name(4) == "7");
  CHECK(c.find_net("16").has_value());
  CHECK(!c.find_net("99").has_value());

  for (const Gate& g : c.gates()) CHECK(g.kind == GateKind::Nand);

  CHECK(c.is_primary_input(*c.find_net("3")));
  CHECK(!c.is_primary_input(*c.find_net("22")));
  CHECK(c.is_primary_output(*c.find_net("23")));
}

TEST_CASE("tolerates comments, blank lines, case and spacing") {
  const Circuit c = parse_bench(
      "# header\n"
      "\n"
      "input( a )\n"
      "INPUT(b)\n"
      "output(y)   # trailing comment\n"
      "y = nand( a ,b )\n");
  CHECK(c.primary_inputs().size() == 2);
  CHECK(c.gates()[0].kind == GateKind::Nand);
}

TEST_CASE("accepts INV and BUF aliases") {
  const Circuit c = parse_bench(
      "INPUT(a)\nOUTPUT(x)\nOUTPUT(y)\nx = INV(a)\ny = BUF(a)\n");
  CHECK(c.gates()[0].kind == GateKind::Not);
  CHECK(c.gates()[1].kind == GateKind::Buff);
}

TEST_CASE("undriven signals are rejected") {
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a, b)\n"), UndefinedSignal);
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nOUTPUT(y)\n"), UndefinedSignal);
}

TEST_CASE("double drivers are rejected") {
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\ny = OR(a, b)\n"),
                  DuplicateDriver);
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nINPUT(y)\nOUTPUT(y)\ny = NOT(a)\n"), DuplicateDriver);
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nINPUT(a)\nOUTPUT(a)\n"), DuplicateDriver);
}

TEST_CASE("combinational loops are rejected") {
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nOUTPUT(x)\nx = AND(a, y)\ny = OR(a, x)\n"),
                  CycleDetected);
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nOUTPUT(x)\nx = BUFF(x)\n"), CycleDetected);
}

TEST_CASE("malformed lines are rejected with the offending line number") {
  try {
    parse_bench("INPUT(a)\nwhat is this\n");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a,)\n"), SyntaxError);
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a b)\n"), SyntaxError);
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a, a)\n"), SyntaxError);
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a)\n"), SyntaxError);
  CHECK_THROWS_AS(parse_bench("INPUT()\n"), SyntaxError);
  CHECK_THROWS_AS(parse_bench("INPUT(a\n"), SyntaxError);
}

TEST_CASE("unknown gate functions are rejected") {
  CHECK_THROWS_AS(parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = MYSTERY(a, b)\n"),
                  UnsupportedGate);
}

TEST_CASE("topological order places drivers before consumers") {
  SplitMix64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Circuit c = testutil::random_circuit(rng, 4 + rng.next_below(5), 30);
    std::vector<std::size_t> position(c.gate_count());
    for (std::size_t k = 0; k < c.topo_order().size(); ++k) position[c.topo_order()[k]] = k;
    for (std::size_t g = 0; g < c.gate_count(); ++g) {
      for (const NetId f : c.gates()[g].fanin) {
        const std::int32_t d = c.driver_gate(f);
        if (d >= 0) CHECK(position[d] < position[g]);
      }
    }
  }
}

TEST_CASE("driver and fanout maps agree with the gate list") {
  SplitMix64 rng(42);
  const Circuit c = testutil::random_circuit(rng, 5, 40);
  for (std::size_t g = 0; g < c.gate_count(); ++g) {
    CHECK(c.driver_gate(c.gates()[g].output) == static_cast<std::int32_t>(g));
    for (const NetId f : c.gates()[g].fanin) {
      const auto fanout = c.fanout_gates(f);
      CHECK(std::count(fanout.begin(), fanout.end(), g) ==
            std::count(c.gates()[g].fanin.begin(), c.gates()[g].fanin.end(), f));
    }
  }
  for (const NetId pi : c.primary_inputs()) CHECK(c.driver_gate(pi) == -1);
}

TEST_CASE("net depth is one past the deepest fanin") {
  const Circuit c = parse_bench(
      "INPUT(a)\nINPUT(b)\nOUTPUT(y)\nx = AND(a, b)\nz = NOT(x)\ny = OR(z, a)\n");
  CHECK(c.net_depth()[*c.find_net("a")] == 0);
  CHECK(c.net_depth()[*c.find_net("x")] == 1);
  CHECK(c.net_depth()[*c.find_net("z")] == 2);
  CHECK(c.net_depth()[*c.find_net("y")] == 3);
}

namespace {

// Name-level equality: same interface and same gate multiset.
void check_isomorphic(const Circuit& a, const Circuit& b) {
  REQUIRE(a.primary_inputs().size() == b.primary_inputs().size());
  for (std::size_t i = 0; i < a.primary_inputs().size(); ++i)
    CHECK(a.net_name(a.primary_inputs()[i]) == b.net_name(b.primary_inputs()[i]));
  REQUIRE(a.primary_outputs().size() == b.primary_outputs().size());
  for (std::size_t i = 0; i < a.primary_outputs().size(); ++i)
    CHECK(a.net_name(a.primary_outputs()[i]) == b.net_name(b.primary_outputs()[i]));

  const auto signature = [](const Circuit& c) {
    std::set<std::string> sigs;
    for (const Gate& g : c.gates()) {
      std::string s = c.net_name(g.output) + "=" + std::string(to_string(g.kind));
      for (const NetId f : g.fanin) s += "," + c.net_name(f);
      sigs.insert(s);
    }
    return sigs;
  };
  CHECK(signature(a) == signature(b));
}

}  // namespace

TEST_CASE("canonical writer round-trips") {
  SplitMix64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const Circuit c = testutil::random_circuit(rng, 3 + rng.next_below(6), 25);
    const std::string text = write_bench(c);
    const Circuit back = parse_bench(text, c.name());
    check_isomorphic(c, back);
    CHECK(write_bench(back) == text);  // fixpoint after one round trip
  }
}

TEST_CASE("graph dump is valid JSON with consistent content") {
  const Circuit c = parse_bench(testutil::kC17Text, "c17");
  const nlohmann::json doc = nlohmann::json::parse(circuit_to_json(c));
  CHECK(doc.at("name") == "c17");
  CHECK(doc.at("nets").size() == c.net_count());
  CHECK(doc.at("gates").size() == c.gate_count());
  CHECK(doc.at("inputs").size() == 5);
  const auto& net0 = doc.at("nets").at(0);
  CHECK(net0.at("name") == "1");
  CHECK(net0.at("driver_gate") == -1);
}

TEST_CASE("missing files raise a library error") {
  CHECK_THROWS_AS(parse_bench_file("/nonexistent/nowhere.bench"), Error);
}

TEST_CASE("builder rejects bad arity like the parser") {
  CircuitBuilder b("x");
  b.add_input("a");
  const std::string_view two[] = {"a", "a"};
  CHECK_THROWS_AS(b.add_gate(GateKind::Not, "y", two), SyntaxError);
  const std::string_view one[] = {"a"};
  CHECK_THROWS_AS(b.add_gate(GateKind::And, "y", one), SyntaxError);
}

TEST_SUITE_END();
