// htwb: batch front-end chaining analyze -> forge/train -> harvest -> evaluate.
//
// Every artifact embeds the circuit hash and a config hash derived from the
// parameters that produced it; downstream stages recompute both and refuse
// mismatched inputs with StaleArtifact (exit 3). Usage problems (bad flags,
// missing files, out-of-range thresholds) exit 2, other failures exit 1.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "htwb/agent.hpp"
#include "htwb/artifact.hpp"
#include "htwb/error.hpp"
#include "htwb/evalmetric.hpp"
#include "htwb/htgen.hpp"
#include "htwb/logicsim.hpp"
#include "htwb/netlist.hpp"
#include "htwb/rarenet.hpp"
#include "htwb/rlenv.hpp"
#include "htwb/testability.hpp"

namespace {

using json = nlohmann::json;
using namespace htwb;
namespace fs = std::filesystem;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Profile {
  std::size_t patterns;
  std::uint64_t timesteps;
  std::uint64_t episodes;
  std::uint64_t budget;
};

Profile profile_from_name(const std::string& name) {
  if (name == "desk") return {10'000, 50'000, 2'000, 2'000};
  if (name == "paper") return {100'000, 450'000, 20'000, 20'000};
  throw UsageError("unknown profile: " + name + " (expected desk or paper)");
}

// Canonical double rendering for hash strings; %.17g round-trips exactly.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(std::uint64_t v) { return std::to_string(v); }

Circuit load_circuit(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("no such file: " + path);
  return parse_bench_file(path);
}

json load_json_file(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("no such file: " + path.string());
  return json::parse(read_text_file(path));
}

Scenario parse_scenario(const std::string& name) {
  const auto s = scenario_from_name(name);
  if (!s) throw UsageError("unknown scenario: " + name + " (expected d1, d2 or d3)");
  return *s;
}

// ---------------------------------------------------------------- analyze --

struct AnalysisParams {
  std::string source;  // "splitmix64" or "exhaustive"
  std::size_t patterns = 0;
  std::uint64_t seed = 0;
  double theta = 0.0;
  double eta_threshold = 0.0;
};

std::string analysis_config_hash(const AnalysisParams& p) {
  return fnv1a64_hex("analyze|source=" + p.source + "|patterns=" + num(p.patterns) +
                     "|seed=" + num(p.seed) + "|theta=" + num(p.theta) +
                     "|eta=" + num(p.eta_threshold));
}

struct AnalyzeOpts {
  std::string circuit_path;
  std::string profile = "desk";
  std::string out = ".";
  double theta = 0.1;
  double eta_threshold = 0.8;
  std::uint64_t seed = 1;
  bool exhaustive = false;
  bool dump_graph = false;
};

int cmd_analyze(const AnalyzeOpts& opt) {
  const Circuit circuit = load_circuit(opt.circuit_path);
  const Profile prof = profile_from_name(opt.profile);

  const SwitchingStats stats = opt.exhaustive
                                   ? exhaustive_campaign(circuit)
                                   : random_campaign(circuit, prof.patterns, opt.seed);
  const ControllabilityTable table = compute_controllability(circuit);
  const RareNetSet rare_dyn =
      prune_chains(find_rare_dynamic(circuit, stats, opt.theta), circuit);
  const RareNetSet rare_ctl =
      prune_chains(find_rare_controllability(circuit, table, opt.eta_threshold), circuit);

  const AnalysisParams params{stats.source, stats.pattern_count, stats.seed, opt.theta,
                              opt.eta_threshold};
  json doc;
  doc["artifact"] = "analysis";
  doc["version"] = 1;
  doc["circuit"] = circuit.name();
  doc["circuit_hash"] = circuit_hash(circuit);
  doc["config_hash"] = analysis_config_hash(params);
  doc["rng"] = "splitmix64";
  doc["source"] = params.source;
  doc["patterns"] = params.patterns;
  doc["seed"] = params.seed;
  doc["theta"] = params.theta;
  doc["eta_threshold"] = params.eta_threshold;
  doc["stats"] = json::parse(stats_to_json(circuit, stats));
  doc["controllability"] = json::parse(controllability_to_json(circuit, table));
  doc["rare_dynamic"] = json::parse(rare_to_json(circuit, rare_dyn));
  doc["rare_controllability"] = json::parse(rare_to_json(circuit, rare_ctl));

  fs::create_directories(opt.out);
  const fs::path out_path = fs::path(opt.out) / (circuit.name() + ".analysis.json");
  write_text_file(out_path, doc.dump(2) + "\n");
  if (opt.dump_graph) {
    const fs::path graph_path = fs::path(opt.out) / (circuit.name() + ".graph.json");
    write_text_file(graph_path, circuit_to_json(circuit) + "\n");
  }

  std::cout << "analyze: " << circuit.name() << " nets=" << circuit.net_count()
            << " rare_dynamic=" << rare_dyn.members.size()
            << " rare_controllability=" << rare_ctl.members.size() << " -> "
            << out_path.string() << "\n";
  return 0;
}

// Downstream stages rebuild simulation state from the analysis artifact's
// recorded parameters (campaigns are deterministic in seed), so the JSON
// blobs never need to be parsed back into library types.
struct Analysis {
  AnalysisParams params;
  std::string config_hash;
};

Analysis load_analysis(const std::string& out_dir, const Circuit& circuit) {
  const fs::path path = fs::path(out_dir) / (circuit.name() + ".analysis.json");
  const json doc = load_json_file(path);
  if (doc.value("artifact", "") != "analysis")
    throw UsageError("not an analysis artifact: " + path.string());
  if (doc.value("circuit_hash", "") != circuit_hash(circuit))
    throw StaleArtifact("analysis artifact " + path.string() +
                        " was produced from a different circuit; rerun analyze");
  Analysis a;
  a.params.source = doc.at("source").get<std::string>();
  a.params.patterns = doc.at("patterns").get<std::size_t>();
  a.params.seed = doc.at("seed").get<std::uint64_t>();
  a.params.theta = doc.at("theta").get<double>();
  a.params.eta_threshold = doc.at("eta_threshold").get<double>();
  a.config_hash = doc.value("config_hash", "");
  if (a.config_hash != analysis_config_hash(a.params))
    throw StaleArtifact("analysis artifact " + path.string() +
                        " does not match its recorded parameters; rerun analyze");
  return a;
}

struct EnvInputs {
  SwitchingStats stats;
  ControllabilityTable table;
  RareNetSet rare;
};

EnvInputs rebuild_env_inputs(const Circuit& circuit, const AnalysisParams& p,
                             Scenario scenario) {
  EnvInputs in{p.source == "exhaustive" ? exhaustive_campaign(circuit)
                                        : random_campaign(circuit, p.patterns, p.seed),
               compute_controllability(circuit), {}};
  in.rare = scenario == Scenario::D3
                ? prune_chains(find_rare_controllability(circuit, in.table, p.eta_threshold),
                               circuit)
                : prune_chains(find_rare_dynamic(circuit, in.stats, p.theta), circuit);
  return in;
}

// ------------------------------------------------------------------ forge --

struct ForgeOpts {
  std::string circuit_path;
  std::string profile = "desk";
  std::string out = ".";
  std::uint64_t seed = 1;
};

int cmd_forge(const ForgeOpts& opt) {
  const Circuit circuit = load_circuit(opt.circuit_path);
  const Profile prof = profile_from_name(opt.profile);
  const Analysis analysis = load_analysis(opt.out, circuit);

  // Triggers hide on dynamically rare nets regardless of the detection
  // scenario under test; the corpus is shared across scenarios.
  const EnvInputs in = rebuild_env_inputs(circuit, analysis.params, Scenario::D1);

  CorpusConfig cfg;
  cfg.profile_patterns = prof.patterns;
  cfg.profile_seed = opt.seed;
  // The library refuses widths wider than the rare pool; the batch driver
  // trims the request instead so small circuits still get a corpus.
  std::vector<std::size_t> feasible;
  for (std::size_t w : cfg.widths) {
    if (w <= in.rare.members.size())
      feasible.push_back(w);
    else
      std::cout << "forge: skipping width " << w << " (rare pool has "
                << in.rare.members.size() << " nets)\n";
  }
  if (feasible.empty())
    throw UsageError("no trigger width fits: rare pool has " +
                     num(in.rare.members.size()) + " nets, smallest width is " +
                     num(cfg.widths.empty() ? std::size_t{0} : cfg.widths.front()));
  cfg.widths = std::move(feasible);
  const std::vector<InfectedCircuit> corpus = generate_corpus(circuit, in.rare, cfg, opt.seed);

  std::string widths_key;
  for (std::size_t w : cfg.widths) widths_key += num(w) + ",";
  const std::string config_hash = fnv1a64_hex(
      "forge|widths=" + widths_key + "|per_width=" + num(cfg.per_width) +
      "|fire=" + num(cfg.max_fire_fraction) + "|patterns=" + num(cfg.profile_patterns) +
      "|cone=" + num(cfg.cone_input_limit) + "|attempts=" + num(cfg.attempts_per_trojan) +
      "|seed=" + num(opt.seed) + "|upstream=" + analysis.config_hash);

  const fs::path dir = fs::path(opt.out) / (circuit.name() + ".corpus");
  write_corpus(dir, circuit, corpus, config_hash);

  std::cout << "forge: " << circuit.name() << " trojans=" << corpus.size() << " -> "
            << dir.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ train --

std::string policy_config_hash(const PolicySnapshot& snap, const std::string& upstream) {
  return fnv1a64_hex("train|scenario=" + std::string(to_string(snap.scenario)) +
                     "|timesteps=" + num(snap.trained_timesteps) + "|seed=" + num(snap.seed) +
                     "|upstream=" + upstream);
}

fs::path policy_path(const std::string& out_dir, const Circuit& circuit, Scenario scenario) {
  return fs::path(out_dir) /
         (circuit.name() + "." + std::string(to_string(scenario)) + ".policy");
}

struct TrainOpts {
  std::vector<std::string> circuit_paths;
  std::string scenario = "d2";
  std::string profile = "desk";
  std::string out = ".";
  std::uint64_t timesteps = 0;  // 0: use profile
  std::uint64_t seed = 1;
};

int cmd_train(const TrainOpts& opt) {
  const Scenario scenario = parse_scenario(opt.scenario);
  const Profile prof = profile_from_name(opt.profile);
  const std::uint64_t base = opt.timesteps ? opt.timesteps : prof.timesteps;

  fs::create_directories(opt.out);
  for (std::size_t k = 0; k < opt.circuit_paths.size(); ++k) {
    const Circuit circuit = load_circuit(opt.circuit_paths[k]);
    const Analysis analysis = load_analysis(opt.out, circuit);
    const EnvInputs in = rebuild_env_inputs(circuit, analysis.params, scenario);

    RewardConfig rcfg;
    rcfg.scenario = scenario;
    Environment env(circuit, in.rare, rcfg, &in.stats, &in.table);

    TrainingConfig tcfg;
    // Successive circuits in one run get 10% more timesteps apiece.
    double grown = static_cast<double>(base);
    for (std::size_t i = 0; i < k; ++i) grown *= 1.1;
    tcfg.total_timesteps = static_cast<std::uint64_t>(grown);

    TrainingResult result = train(env, tcfg, opt.seed);
    result.snapshot.circuit_hash = circuit_hash(circuit);
    result.snapshot.config_hash = policy_config_hash(result.snapshot, analysis.config_hash);

    const fs::path path = policy_path(opt.out, circuit, scenario);
    result.snapshot.save(path);

    std::cout << "train: " << circuit.name() << " scenario=" << to_string(scenario)
              << " timesteps=" << result.snapshot.trained_timesteps
              << " final_episode_reward=" << result.snapshot.final_episode_reward << " -> "
              << path.string() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- harvest --

struct HarvestOpts {
  std::string circuit_path;
  std::string scenario = "d2";
  std::string profile = "desk";
  std::string out = ".";
  std::uint64_t episodes = 0;  // 0: use profile
  std::uint64_t budget = 0;    // 0: use profile
  std::uint64_t seed = 1;
  bool baseline = false;
};

json vectors_doc(const Circuit& circuit, const VectorHarvest& h, const std::string& label,
                 const std::string& config_hash, const std::string& upstream_hash,
                 std::uint64_t seed) {
  json doc;
  doc["artifact"] = "vectors";
  doc["version"] = 1;
  doc["circuit"] = circuit.name();
  doc["circuit_hash"] = circuit_hash(circuit);
  doc["config_hash"] = config_hash;
  doc["upstream_hash"] = upstream_hash;
  doc["label"] = label;
  doc["rng"] = "splitmix64";
  doc["seed"] = seed;
  doc["episodes_run"] = h.episodes_run;
  if (std::isfinite(h.cutoff))
    doc["cutoff"] = h.cutoff;
  else
    doc["cutoff"] = nullptr;
  json vecs = json::array();
  for (const Pattern& p : h.vectors) vecs.push_back(p.to_string());
  doc["vectors"] = std::move(vecs);
  doc["rewards"] = h.rewards;
  return doc;
}

int cmd_harvest(const HarvestOpts& opt) {
  const Circuit circuit = load_circuit(opt.circuit_path);
  const Profile prof = profile_from_name(opt.profile);
  const std::uint64_t episodes = opt.episodes ? opt.episodes : prof.episodes;
  const std::uint64_t budget = opt.budget ? opt.budget : prof.budget;

  std::string label;
  json doc;
  if (opt.baseline) {
    label = "random";
    const VectorHarvest h = random_baseline(circuit, budget, opt.seed);
    const std::string config_hash =
        fnv1a64_hex("baseline|count=" + num(budget) + "|seed=" + num(opt.seed) +
                    "|circuit=" + circuit_hash(circuit));
    doc = vectors_doc(circuit, h, label, config_hash, "", opt.seed);
  } else {
    const Scenario scenario = parse_scenario(opt.scenario);
    const Analysis analysis = load_analysis(opt.out, circuit);

    const fs::path ppath = policy_path(opt.out, circuit, scenario);
    if (!fs::exists(ppath)) throw UsageError("no such file: " + ppath.string());
    const PolicySnapshot snap = PolicySnapshot::load(ppath);
    if (snap.circuit_hash != circuit_hash(circuit))
      throw StaleArtifact("policy " + ppath.string() +
                          " was trained on a different circuit; rerun train");
    if (snap.config_hash != policy_config_hash(snap, analysis.config_hash))
      throw StaleArtifact("policy " + ppath.string() +
                          " does not match the analysis artifact on disk; rerun train");

    const EnvInputs in = rebuild_env_inputs(circuit, analysis.params, scenario);
    RewardConfig rcfg;
    rcfg.scenario = scenario;
    Environment env(circuit, in.rare, rcfg, &in.stats, &in.table);

    const VectorHarvest h = harvest(env, snap, episodes, budget, opt.seed);
    label = "rl-" + std::string(to_string(scenario));
    const std::string config_hash =
        fnv1a64_hex("harvest|episodes=" + num(episodes) + "|budget=" + num(budget) +
                    "|seed=" + num(opt.seed) + "|upstream=" + snap.config_hash);
    doc = vectors_doc(circuit, h, label, config_hash, snap.config_hash, opt.seed);
  }

  fs::create_directories(opt.out);
  const fs::path out_path = fs::path(opt.out) / (circuit.name() + "." + label + ".vectors.json");
  write_text_file(out_path, doc.dump(2) + "\n");

  std::cout << "harvest: " << circuit.name() << " label=" << label
            << " vectors=" << doc["vectors"].size() << " -> " << out_path.string() << "\n";
  return 0;
}

// --------------------------------------------------------------- evaluate --

struct EvaluateOpts {
  std::string circuit_path;
  std::vector<std::string> vector_paths;
  std::string corpus_dir;  // empty: <out>/<name>.corpus
  std::string out = ".";
  double alpha = 0.0;
};

int cmd_evaluate(const EvaluateOpts& opt) {
  const Circuit circuit = load_circuit(opt.circuit_path);
  const fs::path corpus_dir = opt.corpus_dir.empty()
                                  ? fs::path(opt.out) / (circuit.name() + ".corpus")
                                  : fs::path(opt.corpus_dir);
  if (!fs::exists(corpus_dir)) throw UsageError("no such corpus directory: " + corpus_dir.string());
  const std::vector<InfectedCircuit> corpus = read_corpus(corpus_dir, circuit);

  std::vector<DetectionReport> reports;
  for (const std::string& vpath : opt.vector_paths) {
    const json doc = load_json_file(vpath);
    if (doc.value("artifact", "") != "vectors")
      throw UsageError("not a vectors artifact: " + vpath);
    if (doc.value("circuit_hash", "") != circuit_hash(circuit))
      throw StaleArtifact("vectors artifact " + vpath +
                          " was harvested from a different circuit; rerun harvest");
    std::vector<Pattern> vectors;
    vectors.reserve(doc.at("vectors").size());
    for (const auto& s : doc.at("vectors")) vectors.push_back(Pattern::from_string(s.get<std::string>()));
    reports.push_back(
        evaluate_corpus(circuit, corpus, vectors, doc.value("label", "unlabeled")));
  }

  const std::string csv = reports_to_csv(reports, opt.alpha);
  const std::string full = reports_to_json(reports, opt.alpha);
  fs::create_directories(opt.out);
  const fs::path csv_path = fs::path(opt.out) / (circuit.name() + ".report.csv");
  const fs::path json_path = fs::path(opt.out) / (circuit.name() + ".report.json");
  write_text_file(csv_path, csv);
  write_text_file(json_path, full + "\n");

  std::cout << csv;
  std::cout << "evaluate: " << circuit.name() << " trojans=" << corpus.size()
            << " vector_sets=" << reports.size() << " -> " << csv_path.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------- main --

int dispatch(int argc, char** argv) {
  CLI::App app{"hardware-trojan workbench: rare-net analysis, trojan forging, "
               "RL test-vector generation and detection scoring"};
  app.require_subcommand(1);

  AnalyzeOpts an;
  auto* analyze = app.add_subcommand("analyze", "switching, controllability and rare-net report");
  analyze->add_option("--circuit", an.circuit_path, "bench netlist")->required()->envname("HTWB_CIRCUIT");
  analyze->add_option("--theta", an.theta, "dynamic rarity threshold on activity")->envname("HTWB_THETA");
  analyze->add_option("--eta-threshold", an.eta_threshold, "controllability imbalance threshold")->envname("HTWB_ETA_THRESHOLD");
  analyze->add_option("--seed", an.seed, "campaign seed")->envname("HTWB_SEED");
  analyze->add_option("--profile", an.profile, "desk or paper")->envname("HTWB_PROFILE");
  analyze->add_option("--out", an.out, "artifact directory")->envname("HTWB_OUT");
  analyze->add_flag("--exhaustive", an.exhaustive, "sweep all input patterns instead of sampling");
  analyze->add_flag("--dump-graph", an.dump_graph, "also write the netlist graph as JSON");

  ForgeOpts fo;
  auto* forge = app.add_subcommand("forge", "generate a trojan corpus on the rare nets");
  forge->add_option("--circuit", fo.circuit_path, "bench netlist")->required()->envname("HTWB_CIRCUIT");
  forge->add_option("--seed", fo.seed, "corpus seed")->envname("HTWB_SEED");
  forge->add_option("--profile", fo.profile, "desk or paper")->envname("HTWB_PROFILE");
  forge->add_option("--out", fo.out, "artifact directory (must hold the analysis)")->envname("HTWB_OUT");

  TrainOpts tr;
  auto* train_cmd = app.add_subcommand("train", "train a policy per circuit");
  train_cmd->add_option("--circuit", tr.circuit_paths, "bench netlist (repeatable)")->required()->envname("HTWB_CIRCUIT");
  train_cmd->add_option("--scenario", tr.scenario, "reward scenario: d1, d2 or d3")->envname("HTWB_SCENARIO");
  train_cmd->add_option("--timesteps", tr.timesteps, "override profile timesteps")->envname("HTWB_TIMESTEPS");
  train_cmd->add_option("--seed", tr.seed, "training seed")->envname("HTWB_SEED");
  train_cmd->add_option("--profile", tr.profile, "desk or paper")->envname("HTWB_PROFILE");
  train_cmd->add_option("--out", tr.out, "artifact directory (must hold the analysis)")->envname("HTWB_OUT");

  HarvestOpts ha;
  auto* harvest_cmd = app.add_subcommand("harvest", "collect test vectors from a trained policy");
  harvest_cmd->add_option("--circuit", ha.circuit_path, "bench netlist")->required()->envname("HTWB_CIRCUIT");
  harvest_cmd->add_option("--scenario", ha.scenario, "reward scenario: d1, d2 or d3")->envname("HTWB_SCENARIO");
  harvest_cmd->add_option("--episodes", ha.episodes, "override profile episodes")->envname("HTWB_EPISODES");
  harvest_cmd->add_option("--budget", ha.budget, "override profile vector budget")->envname("HTWB_BUDGET");
  harvest_cmd->add_option("--seed", ha.seed, "harvest seed")->envname("HTWB_SEED");
  harvest_cmd->add_option("--profile", ha.profile, "desk or paper")->envname("HTWB_PROFILE");
  harvest_cmd->add_option("--out", ha.out, "artifact directory (must hold analysis and policy)")->envname("HTWB_OUT");
  harvest_cmd->add_flag("--baseline", ha.baseline, "emit uniform random vectors instead (no policy needed)");

  EvaluateOpts ev;
  auto* evaluate = app.add_subcommand("evaluate", "replay vector sets against the corpus, score detection");
  evaluate->add_option("--circuit", ev.circuit_path, "golden bench netlist")->required()->envname("HTWB_CIRCUIT");
  evaluate->add_option("--vectors", ev.vector_paths, "vectors artifact (repeatable)")->required();
  evaluate->add_option("--corpus", ev.corpus_dir, "corpus directory (default <out>/<name>.corpus)");
  evaluate->add_option("--alpha", ev.alpha, "false-negative aversion ratio (required, user-set)")->required()->envname("HTWB_ALPHA");
  evaluate->add_option("--out", ev.out, "artifact directory")->envname("HTWB_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (analyze->parsed()) return cmd_analyze(an);
  if (forge->parsed()) return cmd_forge(fo);
  if (train_cmd->parsed()) return cmd_train(tr);
  if (harvest_cmd->parsed()) return cmd_harvest(ha);
  return cmd_evaluate(ev);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const StaleArtifact& e) {
    std::cerr << "htwb: stale artifact: " << e.what() << "\n";
    return 3;
  } catch (const UsageError& e) {
    std::cerr << "htwb: " << e.what() << "\n";
    return 2;
  } catch (const ThetaOutOfRange& e) {
    std::cerr << "htwb: " << e.what() << "\n";
    return 2;
  } catch (const EtaOutOfRange& e) {
    std::cerr << "htwb: " << e.what() << "\n";
    return 2;
  } catch (const AlphaNonPositive& e) {
    std::cerr << "htwb: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "htwb: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "htwb: " << e.what() << "\n";
    return 1;
  }
}
