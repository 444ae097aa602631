#include "htwb/rlenv.hpp"

#include <algorithm>

namespace htwb {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::D1: return "d1";
    case Scenario::D2: return "d2";
    case Scenario::D3: return "d3";
  }
  return "?";
}

std::optional<Scenario> scenario_from_name(std::string_view name) {
  if (name == "d1" || name == "D1") return Scenario::D1;
  if (name == "d2" || name == "D2") return Scenario::D2;
  if (name == "d3" || name == "D3") return Scenario::D3;
  return std::nullopt;
}

double reward_d1(std::span<const std::uint8_t> previous, std::span<const std::uint8_t> current,
                 const RewardConfig& cfg) {
  if (previous.size() != current.size()) throw LengthMismatch(previous.size(), current.size());
  double transition = 0.0;
  double active_now = 0.0;
  for (std::size_t k = 0; k < current.size(); ++k) {
    if (current[k]) {
      transition += previous[k] ? cfg.kept_active : cfg.newly_active;
      active_now += 1.0;
    } else {
      transition += previous[k] ? cfg.lost : cfg.inactive;
    }
  }
  return cfg.weight_sequential * transition + cfg.weight_immediate * active_now;
}

double reward_d2(std::span<const double> switching, std::span<const std::uint8_t> active) {
  if (switching.size() != active.size()) throw LengthMismatch(active.size(), switching.size());

  // Per-net scores: reciprocal switching, zeros patched afterwards to ten
  // times the largest finite score (a net that never toggled in profiling is
  // the most valuable one to light up).
  std::vector<double> score(switching.size());
  double max_score = 0.0;
  for (std::size_t k = 0; k < switching.size(); ++k) {
    const double s = switching[k];
    if (s < 0.0) throw NegativeSwitching(s);
    score[k] = s > 0.0 ? 1.0 / s : 0.0;
    max_score = std::max(max_score, score[k]);
  }
  for (std::size_t k = 0; k < switching.size(); ++k)
    if (switching[k] == 0.0) score[k] = 10.0 * max_score;

  double reward = 0.0;
  for (std::size_t k = 0; k < active.size(); ++k) reward += active[k] ? score[k] : -1.0;
  return reward;
}

double reward_d3(std::span<const double> rare_controllability,
                 std::span<const std::uint8_t> active) {
  if (rare_controllability.size() != active.size())
    throw LengthMismatch(active.size(), rare_controllability.size());
  double reward = 0.0;
  for (std::size_t k = 0; k < active.size(); ++k)
    reward += active[k] ? rare_controllability[k] : -1.0;
  return reward;
}

Environment::Environment(const Circuit& circuit, RareNetSet rare, RewardConfig cfg,
                         const SwitchingStats* stats, const ControllabilityTable* table)
    : circuit_(&circuit), rare_(std::move(rare)), cfg_(cfg), rng_(0) {
  if (cfg_.scenario == Scenario::D2) {
    if (!stats)
      throw CriterionMismatch("scenario d2 needs a switching profile for the rare nets");
    member_switching_.reserve(rare_.size());
    for (const RareNet& m : rare_.members) {
      const double s = stats->activity[m.net];
      if (s < 0.0) throw NegativeSwitching(s);
      member_switching_.push_back(s);
    }
  }
  if (cfg_.scenario == Scenario::D3) {
    if (rare_.criterion != RareCriterion::Controllability)
      throw CriterionMismatch(
          "scenario d3 scores controllability; the rare set was selected by the " +
          std::string(to_string(rare_.criterion)) + " criterion");
    if (!table)
      throw CriterionMismatch("scenario d3 needs a controllability table for the rare nets");
    member_rare_cc_.reserve(rare_.size());
    for (const RareNet& m : rare_.members) {
      const ControlValue& cc = m.rare_value ? table->cc1[m.net] : table->cc0[m.net];
      member_rare_cc_.push_back(cc.convert_to<double>());
    }
  }
}

std::vector<std::uint8_t> Environment::activation_of(const Pattern& pattern) const {
  const std::vector<std::uint8_t> value = evaluate_single(*circuit_, pattern);
  std::vector<std::uint8_t> act(rare_.size());
  for (std::size_t k = 0; k < rare_.size(); ++k)
    act[k] = value[rare_.members[k].net] == rare_.members[k].rare_value;
  return act;
}

EpisodeState Environment::reset() {
  state_.pattern.bits.resize(input_count());
  for (auto& b : state_.pattern.bits) b = rng_.next_bool();
  state_.activation = activation_of(state_.pattern);
  state_.step_index = 0;
  episode_open_ = true;
  return state_;
}

StepResult Environment::step(const Action& action) {
  if (!episode_open_) throw EpisodeFinished();
  if (action.flips.size() != input_count())
    throw ActionSizeMismatch(action.flips.size(), input_count());

  for (std::size_t i = 0; i < action.flips.size(); ++i)
    state_.pattern.bits[i] ^= action.flips[i] & 1u;

  std::vector<std::uint8_t> activation = activation_of(state_.pattern);

  double reward = 0.0;
  switch (cfg_.scenario) {
    case Scenario::D1:
      reward = reward_d1(state_.activation, activation, cfg_);
      break;
    case Scenario::D2:
      reward = reward_d2(member_switching_, activation);
      break;
    case Scenario::D3:
      reward = reward_d3(member_rare_cc_, activation);
      break;
  }

  state_.activation = std::move(activation);
  ++state_.step_index;

  StepResult result;
  result.done = state_.step_index >= cfg_.episode_len;
  if (result.done) episode_open_ = false;
  result.state = state_;
  result.reward = reward;
  return result;
}

}  // namespace htwb
