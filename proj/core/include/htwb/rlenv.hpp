#pragma once

#include <optional>
#include <span>
#include <vector>

#include "htwb/logicsim.hpp"
#include "htwb/rarenet.hpp"
#include "htwb/rng.hpp"
#include "htwb/testability.hpp"

namespace htwb {

class EpisodeFinished : public Error {
public:
  EpisodeFinished() : Error("step() called on a finished episode; call reset()") {}
};

class ActionSizeMismatch : public Error {
public:
  ActionSizeMismatch(std::size_t got, std::size_t want)
      : Error("action has " + std::to_string(got) + " flips, environment expects " +
              std::to_string(want)) {}
};

class LengthMismatch : public Error {
public:
  LengthMismatch(std::size_t got, std::size_t want)
      : Error("vector length " + std::to_string(got) + " does not match rare-net count " +
              std::to_string(want)) {}
};

class NegativeSwitching : public Error {
public:
  explicit NegativeSwitching(double value)
      : Error("switching values must be >= 0, got " + std::to_string(value)) {}
};

/// Reward scenario incompatible with how the rare nets were selected
/// (the controllability-guided reward needs controllability-selected nets).
class CriterionMismatch : public Error {
public:
  explicit CriterionMismatch(const std::string& detail) : Error(detail) {}
};

enum class Scenario : std::uint8_t { D1, D2, D3 };
std::string_view to_string(Scenario s);
std::optional<Scenario> scenario_from_name(std::string_view name);

/// Multi-binary action: flips[i] == 1 toggles primary input i.
struct Action {
  std::vector<std::uint8_t> flips;
};

struct RewardConfig {
  Scenario scenario = Scenario::D1;
  int episode_len = 10;
  // D1 per-net transition table and the weights of its two terms.
  double newly_active = 40.0;
  double kept_active = 20.0;
  double lost = -3.0;
  double inactive = -1.0;
  double weight_sequential = 1.0;
  double weight_immediate = 1.0;
};

/// Transition-aware reward: scores each rare net by its activation change
/// (new/kept/lost/inactive), plus an immediate term counting active nets.
double reward_d1(std::span<const std::uint8_t> previous, std::span<const std::uint8_t> current,
                 const RewardConfig& cfg);

/// Switching-weighted reward: each rare net contributes the reciprocal of
/// its switching value when active and -1 when inactive. Zero switching
/// values contribute ten times the largest finite reciprocal (and 0 when
/// every value is zero). Throws NegativeSwitching / LengthMismatch.
double reward_d2(std::span<const double> switching, std::span<const std::uint8_t> active);

/// Controllability-weighted reward: an active rare net contributes the
/// controllability of its rare value, an inactive one -1.
double reward_d3(std::span<const double> rare_controllability,
                 std::span<const std::uint8_t> active);

struct EpisodeState {
  Pattern pattern;                          // current primary-input assignment
  std::vector<std::uint8_t> activation;     // per pruned rare net: at rare value?
  int step_index = 0;
};

struct StepResult {
  EpisodeState state;
  double reward = 0.0;
  bool done = false;
};

/// Test-pattern mutation environment. An episode starts from a uniformly
/// random pattern; each step XORs the action's flip mask into the pattern,
/// re-simulates, and scores the new rare-net activation under the configured
/// scenario. Episodes run a fixed number of steps.
///
/// The circuit is borrowed and must outlive the environment.
class Environment {
public:
  /// stats is required for D2 (per-member switching), table for D3
  /// (per-member rare-value controllability; also enforces that the rare set
  /// came from the controllability criterion).
  Environment(const Circuit& circuit, RareNetSet rare, RewardConfig cfg,
              const SwitchingStats* stats = nullptr, const ControllabilityTable* table = nullptr);

  std::size_t input_count() const { return circuit_->primary_inputs().size(); }
  std::size_t rare_count() const { return rare_.size(); }
  const RareNetSet& rare_set() const { return rare_; }
  const RewardConfig& config() const { return cfg_; }
  const std::vector<double>& member_switching() const { return member_switching_; }

  /// Starts a new episode with a fresh random pattern from the internal
  /// stream (reseed() pins the stream for reproducible runs).
  EpisodeState reset();
  void reseed(std::uint64_t seed) { rng_ = SplitMix64(seed); }

  /// Applies the flip mask, returns the scored transition. Throws
  /// EpisodeFinished past the episode length and ActionSizeMismatch on a
  /// wrong-size action.
  StepResult step(const Action& action);

  const EpisodeState& state() const { return state_; }

  /// Activation vector of an arbitrary pattern (used by the harvester).
  std::vector<std::uint8_t> activation_of(const Pattern& pattern) const;

private:
  const Circuit* circuit_;
  RareNetSet rare_;
  RewardConfig cfg_;
  std::vector<double> member_switching_;   // D2 weights
  std::vector<double> member_rare_cc_;     // D3 weights
  SplitMix64 rng_;
  EpisodeState state_;
  bool episode_open_ = false;
};

}  // namespace htwb
