#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "htwb/evalmetric.hpp"
#include "htwb/rarenet.hpp"
#include "htwb/rng.hpp"
#include "testutil.hpp"

using namespace htwb;

TEST_SUITE_BEGIN("evalmetric");

namespace {

std::vector<Pattern> all_patterns(std::size_t n_inputs) {
  std::vector<Pattern> out;
  for (unsigned v = 0; v < (1u << n_inputs); ++v)
    out.push_back(testutil::index_pattern(n_inputs, v));
  return out;
}

InfectedCircuit c17_probe() {
  const Circuit c17 = parse_bench(testutil::kC17Text, "c17");
  TrojanSpec spec;
  spec.id = "probe";
  spec.trigger_nets = {*c17.find_net("10"), *c17.find_net("19")};
  spec.trigger_values = {0, 1};
  spec.victim = *c17.find_net("16");
  return insert_trojan(c17, spec);
}

DetectionReport sample_report() {
  DetectionReport rep;
  rep.circuit = "cA";
  rep.label = "rand";
  rep.vector_count = 100;
  rep.results.push_back({"w2_0", 2, {true, true}});
  rep.results.push_back({"w2_1", 2, {false, false}});
  rep.results.push_back({"w3_0", 3, {true, true}});
  rep.results.push_back({"w3_1", 3, {true, true}});
  return rep;
}

}  // namespace

TEST_CASE("detect reports a firing, output-visible trojan") {
  const Circuit c17 = parse_bench(testutil::kC17Text, "c17");
  const InfectedCircuit inf = c17_probe();

  const std::vector<Pattern> sweep = all_patterns(5);
  const DetectionOutcome hit = detect(c17, inf, sweep);
  CHECK(hit.trigger_fired);
  CHECK(hit.output_diff);

  // No vectors, no evidence.
  const DetectionOutcome idle = detect(c17, inf, {});
  CHECK(!idle.trigger_fired);
  CHECK(!idle.output_diff);

  // A single vector that cannot satisfy the trigger: input 1 = 0 forces
  // net 10 = 1, but the trigger needs it at 0.
  const std::vector<Pattern> blind{Pattern{std::vector<std::uint8_t>(5, 0)}};
  const DetectionOutcome miss = detect(c17, inf, blind);
  CHECK(!miss.trigger_fired);
  CHECK(!miss.output_diff);
}

TEST_CASE("a fired trigger whose payload is masked is not a detection") {
  // Firing requires a = b = 1, which drives z = NOR(a, b) = 0 and masks the
  // victim flip behind g = AND(v, z). The diagnostic sees the trigger, the
  // verdict does not change.
  const Circuit c = parse_bench(
      "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(e)\nOUTPUT(g)\n"
      "x = AND(a, b)\ny2 = AND(c, e)\nv = NOT(e)\nz = NOR(a, b)\ng = AND(v, z)\n");
  TrojanSpec spec;
  spec.id = "masked";
  spec.trigger_nets = {*c.find_net("x"), *c.find_net("y2")};
  spec.trigger_values = {1, 1};
  spec.victim = *c.find_net("v");
  const InfectedCircuit inf = insert_trojan(c, spec);

  const DetectionOutcome outcome = detect(c, inf, all_patterns(4));
  CHECK(outcome.trigger_fired);
  CHECK(!outcome.output_diff);
}

TEST_CASE("detect refuses mismatched output interfaces") {
  const Circuit c17 = parse_bench(testutil::kC17Text, "c17");
  InfectedCircuit bogus = c17_probe();
  bogus.circuit = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\n");
  const std::vector<Pattern> sweep = all_patterns(5);
  CHECK_THROWS_AS(detect(c17, bogus, sweep), Error);

  // Same output count, different name.
  bogus.circuit = parse_bench(
      "INPUT(1)\nINPUT(2)\nINPUT(3)\nINPUT(6)\nINPUT(7)\nOUTPUT(22)\nOUTPUT(ZZ)\n"
      "22 = NAND(1, 2)\nZZ = NAND(3, 7)\n");
  CHECK_THROWS_AS(detect(c17, bogus, sweep), Error);
}

TEST_CASE("report accounting: rates, widths, per-width lookups") {
  const DetectionReport rep = sample_report();
  CHECK(rep.detection_rate() == doctest::Approx(0.75));
  CHECK(rep.trigger_rate() == doctest::Approx(0.75));
  CHECK(rep.widths() == std::vector<std::size_t>{2, 3});
  CHECK(*rep.detection_rate_for_width(2) == doctest::Approx(0.5));
  CHECK(*rep.detection_rate_for_width(3) == doctest::Approx(1.0));
  CHECK(!rep.detection_rate_for_width(4).has_value());

  const DetectionReport empty;
  CHECK(empty.detection_rate() == doctest::Approx(0.0));
  CHECK(empty.trigger_rate() == doctest::Approx(0.0));
  CHECK(empty.widths().empty());
}

TEST_CASE("evaluate_corpus replays a vector set against every trojan") {
  const Circuit c17 = parse_bench(testutil::kC17Text, "c17");
  const RareNetSet rare = find_rare_dynamic(c17, exhaustive_campaign(c17), 0.3);
  CorpusConfig cfg;
  cfg.widths = {2};
  cfg.per_width = 2;
  cfg.profile_patterns = 2048;
  cfg.max_fire_fraction = 0.2;
  const std::vector<InfectedCircuit> corpus = generate_corpus(c17, rare, cfg, 4);

  const std::vector<Pattern> sweep = all_patterns(5);
  const DetectionReport rep = evaluate_corpus(c17, corpus, sweep, "sweep");
  CHECK(rep.circuit == "c17");
  CHECK(rep.label == "sweep");
  CHECK(rep.vector_count == 32);
  REQUIRE(rep.results.size() == corpus.size());
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    CHECK(rep.results[k].id == corpus[k].spec.id);
    CHECK(rep.results[k].width == 2);
    // The full sweep covers each witness, so every trigger fires.
    CHECK(rep.results[k].outcome.trigger_fired);
  }

  const DetectionReport starved = evaluate_corpus(c17, corpus, {}, "none");
  CHECK(starved.detection_rate() == doctest::Approx(0.0));
  CHECK(starved.vector_count == 0);
}

TEST_CASE("confidence formula hand values and guard rails") {
  CHECK(confidence_value(0.0, 0.0, 10.0) == doctest::Approx(10.0));
  CHECK(confidence_value(0.0, 1.0, 10.0) == doctest::Approx(10.0 / 11.0));
  CHECK(confidence_value(0.5, 0.5, 10.0) == doctest::Approx(0.5 / 0.6));
  CHECK(confidence_value(0.0, 0.0, 1000.0) == doctest::Approx(1000.0));
  CHECK(confidence_value(1.0, 1.0, 10.0) == doctest::Approx(0.0));

  CHECK_THROWS_AS(confidence_value(0.0, 0.0, 0.0), AlphaNonPositive);
  CHECK_THROWS_AS(confidence_value(0.0, 0.0, -2.0), AlphaNonPositive);
  CHECK_THROWS_AS(confidence_value(0.0, 0.0, std::nan("")), AlphaNonPositive);
  CHECK_THROWS_AS(confidence_value(-0.1, 0.0, 10.0), ProbabilityOutOfRange);
  CHECK_THROWS_AS(confidence_value(1.1, 0.0, 10.0), ProbabilityOutOfRange);
  CHECK_THROWS_AS(confidence_value(0.0, -0.1, 10.0), ProbabilityOutOfRange);
  CHECK_THROWS_AS(confidence_value(0.0, 1.5, 10.0), ProbabilityOutOfRange);
  CHECK_THROWS_AS(confidence_value(0.0, std::nan(""), 10.0), ProbabilityOutOfRange);
}

TEST_CASE("confidence stays within bounds and responds monotonically") {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 1000; ++trial) {
    const double fp = rng.next_double();
    const double fn = rng.next_double();
    const double alpha = 0.1 + 100.0 * rng.next_double();
    const double v = confidence_value(fp, fn, alpha);
    CHECK(v >= 0.0);
    CHECK(v <= alpha);

    // More errors never increase confidence.
    if (fp < 0.9) CHECK(confidence_value(fp + 0.1, fn, alpha) <= v);
    if (fn < 0.9) CHECK(confidence_value(fp, fn + 0.1, alpha) <= v);
  }
}

TEST_CASE("scenario confidence averages the miss rate with no false positives") {
  DetectionReport perfect = sample_report();
  perfect.results.clear();
  perfect.results.push_back({"w2_0", 2, {true, true}});

  DetectionReport half = sample_report();
  half.results.clear();
  half.results.push_back({"w2_0", 2, {true, true}});
  half.results.push_back({"w2_1", 2, {true, false}});

  const std::vector<DetectionReport> reports{perfect, half};
  // Miss rates 0 and 0.5 average to 0.25.
  CHECK(scenario_confidence(reports, 10.0) == doctest::Approx(1.0 / (0.1 + 0.25)));

  CHECK_THROWS_AS(scenario_confidence({}, 10.0), EmptyReports);
  DetectionReport hollow;
  hollow.label = "hollow";
  const std::vector<DetectionReport> with_hollow{hollow};
  CHECK_THROWS_AS(scenario_confidence(with_hollow, 10.0), EmptyReports);
}

TEST_CASE("JSON serialization carries rates, outcomes and per-width confidence") {
  const std::vector<DetectionReport> reports{sample_report()};
  const nlohmann::json doc = nlohmann::json::parse(reports_to_json(reports, 10.0));
  CHECK(doc.at("alpha") == doctest::Approx(10.0));
  REQUIRE(doc.at("reports").size() == 1);
  const nlohmann::json& rep = doc.at("reports").at(0);
  CHECK(rep.at("circuit") == "cA");
  CHECK(rep.at("label") == "rand");
  CHECK(rep.at("vector_count") == 100);
  CHECK(rep.at("detection_rate") == doctest::Approx(0.75));
  CHECK(rep.at("trigger_rate") == doctest::Approx(0.75));
  REQUIRE(rep.at("trojans").size() == 4);
  CHECK(rep.at("trojans").at(1).at("id") == "w2_1");
  CHECK(rep.at("trojans").at(1).at("output_diff") == false);
  CHECK(rep.at("per_width").at("2").at("detection_rate") == doctest::Approx(0.5));
  CHECK(rep.at("per_width").at("2").at("confidence") ==
        doctest::Approx(confidence_value(0.0, 0.5, 10.0)));
  CHECK(rep.at("per_width").at("3").at("confidence") == doctest::Approx(10.0));
}

TEST_CASE("CSV grid: width-major columns, circuit rows, confidence footer") {
  const std::vector<DetectionReport> one{sample_report()};
  CHECK(reports_to_csv(one, 10.0) ==
        "circuit,2-trigger rand,3-trigger rand\n"
        "cA,50.00,100.00\n"
        "confidence,1.67,10.00\n");

  // Second circuit, width 2 only: its width-3 cell stays empty and the
  // width-3 confidence aggregates the circuits that do have a value.
  DetectionReport second;
  second.circuit = "cB";
  second.label = "rand";
  second.vector_count = 100;
  second.results.push_back({"w2_0", 2, {true, false}});
  const std::vector<DetectionReport> two{sample_report(), second};
  CHECK(reports_to_csv(two, 10.0) ==
        "circuit,2-trigger rand,3-trigger rand\n"
        "cA,50.00,100.00\n"
        "cB,0.00,\n"
        "confidence,1.18,10.00\n");

  CHECK_THROWS_AS(reports_to_csv({}, 10.0), EmptyReports);
}

TEST_CASE("CSV interleaves labels within each width") {
  DetectionReport rl = sample_report();
  rl.label = "rl";
  const std::vector<DetectionReport> mixed{sample_report(), rl};
  const std::string csv = reports_to_csv(mixed, 10.0);
  CHECK(csv.rfind("circuit,2-trigger rand,2-trigger rl,3-trigger rand,3-trigger rl\n", 0) == 0);
}

TEST_SUITE_END();
