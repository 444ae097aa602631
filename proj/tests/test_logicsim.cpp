#include <doctest.h>

#include <bit>

#include <nlohmann/json.hpp>

#include "htwb/logicsim.hpp"
#include "testutil.hpp"

using namespace htwb;

TEST_SUITE_BEGIN("logicsim");

namespace {

Circuit single_gate(GateKind kind, std::size_t arity) {
  CircuitBuilder b(std::string(to_string(kind)));
  std::vector<std::string> names;
  std::vector<std::string_view> views;
  for (std::size_t i = 0; i < arity; ++i) {
    names.push_back("i" + std::to_string(i));
    b.add_input(names.back());
  }
  for (const auto& n : names) views.push_back(n);
  b.add_gate(kind, "y", views);
  b.mark_output("y");
  return std::move(b).build();
}

void check_against_oracle_exhaustive(const Circuit& c) {
  const std::size_t n = c.primary_inputs().size();
  std::vector<Pattern> patterns;
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx)
    patterns.push_back(testutil::index_pattern(n, idx));
  const ValueTable table = evaluate(c, patterns);
  for (std::uint64_t idx = 0; idx < patterns.size(); ++idx) {
    const std::vector<int> expect = testutil::oracle_simulate(c, patterns[idx]);
    for (NetId net = 0; net < c.net_count(); ++net)
      REQUIRE(static_cast<int>(table.get(net, idx)) == expect[net]);
  }
}

}  // namespace

TEST_CASE("every gate kind matches the truth-table oracle") {
  for (const GateKind kind : {GateKind::And, GateKind::Nand, GateKind::Or, GateKind::Nor,
                              GateKind::Xor, GateKind::Xnor}) {
    check_against_oracle_exhaustive(single_gate(kind, 2));
    check_against_oracle_exhaustive(single_gate(kind, 3));
    check_against_oracle_exhaustive(single_gate(kind, 4));
  }
  check_against_oracle_exhaustive(single_gate(GateKind::Not, 1));
  check_against_oracle_exhaustive(single_gate(GateKind::Buff, 1));
}

TEST_CASE("folded XNOR keeps the documented parity semantics") {
  // Left-fold of 2-input XNOR: arity 3 equals plain parity, arity 2 and 4
  // equal negated parity.
  const Circuit x3 = single_gate(GateKind::Xnor, 3);
  const NetId y3 = *x3.find_net("y");
  for (std::uint64_t idx = 0; idx < 8; ++idx) {
    const auto v = evaluate_single(x3, testutil::index_pattern(3, idx));
    CHECK(v[y3] == (std::popcount(idx) & 1));
  }
  const Circuit x4 = single_gate(GateKind::Xnor, 4);
  const NetId y4 = *x4.find_net("y");
  for (std::uint64_t idx = 0; idx < 16; ++idx) {
    const auto v = evaluate_single(x4, testutil::index_pattern(4, idx));
    CHECK(v[y4] == 1 - (std::popcount(idx) & 1));
  }
}

TEST_CASE("random circuits match the oracle exhaustively") {
  SplitMix64 rng(1001);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + rng.next_below(8);  // up to 9 inputs
    const Circuit c = testutil::random_circuit(rng, n, 10 + rng.next_below(30));
    check_against_oracle_exhaustive(c);
  }
}

TEST_CASE("packed evaluation agrees with the scalar path") {
  SplitMix64 rng(1002);
  const Circuit c = testutil::random_circuit(rng, 12, 60);
  std::vector<Pattern> patterns;
  for (int k = 0; k < 300; ++k) {
    Pattern p;
    for (std::size_t i = 0; i < 12; ++i) p.bits.push_back(rng.next_bool());
    patterns.push_back(p);
  }
  const ValueTable table = evaluate(c, patterns);
  CHECK(table.pattern_count() == 300);
  for (std::size_t j = 0; j < patterns.size(); ++j) {
    const auto v = evaluate_single(c, patterns[j]);
    for (NetId net = 0; net < c.net_count(); ++net)
      REQUIRE(table.get(net, j) == (v[net] != 0));
  }
}

TEST_CASE("tail bits beyond the pattern count stay zero") {
  const Circuit c = single_gate(GateKind::Not, 1);
  for (const std::size_t count : {1u, 5u, 63u, 64u, 65u, 100u, 128u}) {
    std::vector<Pattern> patterns(count, Pattern{{0}});
    const ValueTable table = evaluate(c, patterns);
    // NOT of constant 0 is 1 on every real pattern; tail must not leak.
    CHECK(table.popcount_row(*c.find_net("y")) == count);
  }
}

TEST_CASE("pattern size mismatches are rejected") {
  const Circuit c = single_gate(GateKind::And, 2);
  const std::vector<Pattern> bad{Pattern{{1, 0, 1}}};
  CHECK_THROWS_AS(evaluate(c, bad), PatternSizeMismatch);
  CHECK_THROWS_AS(evaluate_single(c, Pattern{{1}}), PatternSizeMismatch);
}

TEST_CASE("exhaustive campaigns count exactly") {
  const Circuit c = single_gate(GateKind::And, 2);
  const SwitchingStats stats = exhaustive_campaign(c);
  CHECK(stats.pattern_count == 4);
  CHECK(stats.source == "exhaustive");
  const NetId y = *c.find_net("y");
  CHECK(stats.ones[y] == 1);
  CHECK(stats.activity[y] == doctest::Approx(0.25));
  CHECK(stats.rare_value[y] == 1);
  for (const NetId pi : c.primary_inputs()) {
    CHECK(stats.ones[pi] == 2);
    CHECK(stats.activity[pi] == doctest::Approx(0.5));
    CHECK(stats.rare_value[pi] == 0);  // tie resolves to 0
  }
}

TEST_CASE("exhaustive campaign agrees with per-pattern enumeration on a wide circuit") {
  SplitMix64 rng(1003);
  const Circuit c = testutil::random_circuit(rng, 8, 25);
  const SwitchingStats stats = exhaustive_campaign(c);
  std::vector<std::uint64_t> ones(c.net_count(), 0);
  for (std::uint64_t idx = 0; idx < 256; ++idx) {
    const auto v = evaluate_single(c, testutil::index_pattern(8, idx));
    for (NetId net = 0; net < c.net_count(); ++net) ones[net] += v[net];
  }
  CHECK(stats.ones == ones);
}

TEST_CASE("exhaustive campaigns refuse wide circuits") {
  CircuitBuilder b("wide");
  std::vector<std::string> names;
  std::vector<std::string_view> views;
  for (int i = 0; i < 25; ++i) {
    names.push_back("i" + std::to_string(i));
    b.add_input(names.back());
  }
  for (const auto& n : names) views.push_back(n);
  b.add_gate(GateKind::Or, "y", views);
  b.mark_output("y");
  const Circuit c = std::move(b).build();
  CHECK_THROWS_AS(exhaustive_campaign(c), TooManyInputs);
}

TEST_CASE("random campaigns are deterministic in the seed") {
  SplitMix64 rng(1004);
  const Circuit c = testutil::random_circuit(rng, 10, 40);
  const SwitchingStats a = random_campaign(c, 5000, 7);
  const SwitchingStats b = random_campaign(c, 5000, 7);
  const SwitchingStats d = random_campaign(c, 5000, 8);
  CHECK(a.ones == b.ones);
  CHECK(a.ones != d.ones);
  CHECK(a.source == "splitmix64");
  CHECK(a.seed == 7);
}

TEST_CASE("campaign patterns can be replayed individually") {
  SplitMix64 rng(1005);
  const Circuit c = testutil::random_circuit(rng, 9, 30);
  constexpr std::uint64_t kSeed = 99;
  constexpr std::uint64_t kCount = 500;

  // Capture the campaign's packed values, then regenerate single patterns
  // and check every net agrees with a fresh scalar evaluation.
  std::vector<std::vector<bool>> column_of(c.net_count(),
                                           std::vector<bool>(kCount, false));
  random_campaign_scan(c, kCount, kSeed, [&](const ValueTable& table, std::uint64_t first) {
    for (NetId net = 0; net < c.net_count(); ++net)
      for (std::size_t j = 0; j < table.pattern_count(); ++j)
        column_of[net][first + j] = table.get(net, j);
  });

  for (const std::uint64_t idx : {std::uint64_t{0}, std::uint64_t{1}, std::uint64_t{63},
                                  std::uint64_t{64}, std::uint64_t{257}, std::uint64_t{499}}) {
    const Pattern p = campaign_pattern(c, kSeed, idx);
    const auto v = evaluate_single(c, p);
    for (NetId net = 0; net < c.net_count(); ++net)
      REQUIRE(column_of[net][idx] == (v[net] != 0));
  }
}

TEST_CASE("campaign one-counts equal the recorded columns") {
  SplitMix64 rng(1006);
  const Circuit c = testutil::random_circuit(rng, 7, 20);
  const std::uint64_t count = 321;  // deliberately not a word multiple
  const SwitchingStats stats = random_campaign(c, count, 5);
  std::vector<std::uint64_t> ones(c.net_count(), 0);
  random_campaign_scan(c, count, 5, [&](const ValueTable& table, std::uint64_t) {
    for (NetId net = 0; net < c.net_count(); ++net) ones[net] += table.popcount_row(net);
  });
  CHECK(stats.ones == ones);
  CHECK(stats.pattern_count == count);
}

TEST_CASE("activity and rare value derive from the one-counts") {
  SwitchingStats s = SwitchingStats::from_counts({0, 25, 50, 75, 100}, 100);
  CHECK(s.activity[0] == doctest::Approx(0.0));
  CHECK(s.activity[1] == doctest::Approx(0.25));
  CHECK(s.activity[2] == doctest::Approx(0.5));
  CHECK(s.activity[3] == doctest::Approx(0.25));
  CHECK(s.activity[4] == doctest::Approx(0.0));
  CHECK(s.rare_value[0] == 1);
  CHECK(s.rare_value[1] == 1);
  CHECK(s.rare_value[2] == 0);  // tie at one half
  CHECK(s.rare_value[3] == 0);
  CHECK(s.rare_value[4] == 0);
}

TEST_CASE("pattern string conversion inverts") {
  const Pattern p = Pattern::from_string("01101");
  CHECK(p.to_string() == "01101");
  const std::vector<std::uint8_t> expected{0, 1, 1, 0, 1};
  CHECK(p.bits == expected);
  CHECK_THROWS_AS(Pattern::from_string("01x"), Error);
}

TEST_CASE("switching profile serializes to JSON keyed by net name") {
  const Circuit c = single_gate(GateKind::And, 2);
  const SwitchingStats stats = exhaustive_campaign(c);
  const nlohmann::json doc = nlohmann::json::parse(stats_to_json(c, stats));
  CHECK(doc.at("pattern_count") == 4);
  CHECK(doc.at("rng_algorithm") == "exhaustive");
  CHECK(doc.at("nets").at("y").at("ones") == 1);
  CHECK(doc.at("nets").at("y").at("rare_value") == 1);
}

TEST_SUITE_END();
