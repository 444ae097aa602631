#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "htwb/policy.hpp"
#include "htwb/rlenv.hpp"

namespace htwb {

/// Training produced a non-finite loss or parameter value.
class DivergenceDetected : public Error {
public:
  explicit DivergenceDetected(const std::string& detail)
      : Error("training diverged: " + detail) {}
};

/// Invalid hyperparameter combination.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& detail) : Error("bad training config: " + detail) {}
};

struct TrainingConfig {
  std::uint64_t total_timesteps = 450'000;
  int hidden_units = 64;
  int batch_steps = 2048;       // environment steps per policy update
  int update_epochs = 10;
  int minibatch_size = 256;
  double learning_rate = 3e-4;
  double discount = 0.99;
  double gae_decay = 0.95;      // lambda of generalized advantage estimation
  double clip_ratio = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  double actor_output_scale = 0.01;  // keeps the initial policy near uniform

  void validate() const;  // throws ConfigError
};

struct ActorCritic {
  Mlp actor;   // observation -> one logit per primary input
  Mlp critic;  // observation -> scalar state value
};

/// Trained policy with enough metadata to rebuild the networks and to verify
/// artifact freshness. Serialized as a versioned binary container:
///   8 bytes  magic "HTWBPOL1"
///   u32 LE   JSON header length
///   ...      JSON header (dims, scenario, seed, hashes, parameter counts)
///   f64 LE   actor parameters, then critic parameters
struct PolicySnapshot {
  std::uint32_t version = 1;
  std::size_t observation_dim = 0;
  std::size_t action_dim = 0;
  int hidden_units = 64;
  Scenario scenario = Scenario::D1;
  std::uint64_t trained_timesteps = 0;
  std::uint64_t seed = 0;
  double final_episode_reward = 0.0;
  std::string circuit_hash;   // filled by the pipeline front-end
  std::string config_hash;
  std::vector<double> actor_params;
  std::vector<double> critic_params;

  ActorCritic instantiate() const;  // throws ShapeMismatch on bad counts

  void save(const std::filesystem::path& path) const;
  static PolicySnapshot load(const std::filesystem::path& path);
};

struct TrainingResult {
  PolicySnapshot snapshot;
  std::vector<double> episode_rewards;  // every completed episode, in order
};

/// Proximal-policy training loop: on-policy batches, generalized advantage
/// estimation, clipped surrogate objective, Adam. Deterministic for a fixed
/// (environment, config, seed) triple. Throws DivergenceDetected if the loss
/// stops being finite.
TrainingResult train(Environment& env, const TrainingConfig& cfg, std::uint64_t seed);

/// Test vectors kept from policy rollouts.
struct VectorHarvest {
  std::vector<Pattern> vectors;   // deduplicated, first occurrence kept
  std::vector<double> rewards;    // step reward that admitted each vector
  double cutoff = 0.0;
  std::uint64_t episodes_run = 0;
};

/// Rolls the trained policy for `episodes` episodes and keeps every visited
/// pattern whose step reward clears the snapshot's per-step cutoff
/// (final_episode_reward / episode_len), stopping early once `budget`
/// distinct vectors are collected.
VectorHarvest harvest(Environment& env, const PolicySnapshot& snapshot, std::uint64_t episodes,
                      std::uint64_t budget, std::uint64_t seed);

/// Size-matched uniform-random control set (no cutoff, deduplicated).
VectorHarvest random_baseline(const Circuit& circuit, std::uint64_t count, std::uint64_t seed);

// --- exposed PPO internals (the gradient check in the test suite drives
// these directly; the training loop is built on them) ---

/// One frozen optimization batch in flat row-major layout.
struct PpoBatch {
  std::size_t obs_dim = 0;
  std::size_t act_dim = 0;
  std::vector<double> obs;            // [n][obs_dim]
  std::vector<std::uint8_t> actions;  // [n][act_dim]
  std::vector<double> old_logprob;    // [n]
  std::vector<double> advantage;      // [n], already normalized
  std::vector<double> value_target;   // [n]

  std::size_t size() const { return old_logprob.size(); }
};

struct PpoLossTerms {
  double total = 0.0;     // policy + value_coef * value - entropy_coef * entropy
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
};

/// Mean loss over the batch; accumulates parameter gradients into the spans
/// when they are non-empty (sized like the respective param vectors).
PpoLossTerms ppo_loss(const ActorCritic& ac, const PpoBatch& batch, const TrainingConfig& cfg,
                      std::span<double> grad_actor, std::span<double> grad_critic);

}  // namespace htwb
