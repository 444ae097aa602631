#include "htwb/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace htwb {

void TrainingConfig::validate() const {
  if (total_timesteps == 0) throw ConfigError("total_timesteps must be positive");
  if (hidden_units <= 0) throw ConfigError("hidden_units must be positive");
  if (batch_steps <= 0) throw ConfigError("batch_steps must be positive");
  if (update_epochs <= 0) throw ConfigError("update_epochs must be positive");
  if (minibatch_size <= 0 || minibatch_size > batch_steps)
    throw ConfigError("minibatch_size must lie in [1, batch_steps]");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(discount > 0.0) || discount > 1.0) throw ConfigError("discount must lie in (0, 1]");
  if (gae_decay < 0.0 || gae_decay > 1.0) throw ConfigError("gae_decay must lie in [0, 1]");
  if (!(clip_ratio > 0.0) || clip_ratio >= 1.0) throw ConfigError("clip_ratio must lie in (0, 1)");
  if (value_coef < 0.0) throw ConfigError("value_coef must be >= 0");
  if (entropy_coef < 0.0) throw ConfigError("entropy_coef must be >= 0");
  if (!(max_grad_norm > 0.0)) throw ConfigError("max_grad_norm must be positive");
}

// --- PPO loss ---

PpoLossTerms ppo_loss(const ActorCritic& ac, const PpoBatch& batch, const TrainingConfig& cfg,
                      std::span<double> grad_actor, std::span<double> grad_critic) {
  const std::size_t n = batch.size();
  if (n == 0) throw ShapeMismatch("empty batch");
  if (batch.obs.size() != n * batch.obs_dim || batch.actions.size() != n * batch.act_dim ||
      batch.advantage.size() != n || batch.value_target.size() != n)
    throw ShapeMismatch("batch arrays disagree on sample count");
  if (ac.actor.input_dim() != batch.obs_dim || ac.actor.output_dim() != batch.act_dim ||
      ac.critic.input_dim() != batch.obs_dim || ac.critic.output_dim() != 1)
    throw ShapeMismatch("network dims do not match batch dims");
  const bool want_actor = !grad_actor.empty();
  const bool want_critic = !grad_critic.empty();
  if (want_actor && grad_actor.size() != ac.actor.param_count())
    throw ShapeMismatch("actor gradient buffer size");
  if (want_critic && grad_critic.size() != ac.critic.param_count())
    throw ShapeMismatch("critic gradient buffer size");

  const double inv_n = 1.0 / static_cast<double>(n);
  PpoLossTerms terms;
  Mlp::Trace trace;
  std::vector<double> dlogits(batch.act_dim);

  for (std::size_t s = 0; s < n; ++s) {
    const std::span<const double> obs{batch.obs.data() + s * batch.obs_dim, batch.obs_dim};
    const std::span<const std::uint8_t> action{batch.actions.data() + s * batch.act_dim,
                                               batch.act_dim};
    const double adv = batch.advantage[s];

    // Policy term: clipped importance-ratio surrogate.
    ac.actor.forward(obs, trace);
    const std::vector<double>& logits = trace.act.back();
    const double logp = bernoulli_logprob(logits, action);
    const double ratio = std::exp(logp - batch.old_logprob[s]);
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
    const double surrogate = std::min(ratio * adv, clipped * adv);
    terms.policy -= surrogate * inv_n;
    terms.entropy += bernoulli_entropy(logits) * inv_n;

    if (want_actor) {
      // d(-surrogate)/dlogp is -adv * ratio while the unclipped branch is
      // the minimum, 0 once the clipped constant branch takes over.
      const double dsurr_dlogp = ratio * adv <= clipped * adv ? -adv * ratio : 0.0;
      for (std::size_t i = 0; i < batch.act_dim; ++i) {
        const double p = sigmoid(logits[i]);
        const double dlogp_dz = (action[i] ? 1.0 : 0.0) - p;
        const double dent_dz = -logits[i] * p * (1.0 - p);
        dlogits[i] = (dsurr_dlogp * dlogp_dz - cfg.entropy_coef * dent_dz) * inv_n;
      }
      ac.actor.backward(trace, dlogits, grad_actor);
    }

    // Value term: squared error against the GAE return.
    ac.critic.forward(obs, trace);
    const double v = trace.act.back()[0];
    const double err = v - batch.value_target[s];
    terms.value += err * err * inv_n;
    if (want_critic) {
      const double dv[1] = {cfg.value_coef * 2.0 * err * inv_n};
      ac.critic.backward(trace, dv, grad_critic);
    }
  }

  terms.total = terms.policy + cfg.value_coef * terms.value - cfg.entropy_coef * terms.entropy;
  return terms;
}

// --- optimizer ---

namespace {

struct Adam {
  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  std::vector<double> m, v;
  std::uint64_t t = 0;
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  void step(std::span<double> params, std::span<const double> grad, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
    }
  }
};

void clip_by_global_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (const double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
}

std::vector<double> to_obs(const std::vector<std::uint8_t>& activation) {
  return {activation.begin(), activation.end()};
}

}  // namespace

// --- training loop ---

TrainingResult train(Environment& env, const TrainingConfig& cfg, std::uint64_t seed) {
  cfg.validate();

  const std::size_t obs_dim = env.rare_count();
  const std::size_t act_dim = env.input_count();
  const std::size_t hidden = static_cast<std::size_t>(cfg.hidden_units);

  // Decorrelated streams: environment resets, weight init, action sampling,
  // minibatch shuffling.
  env.reseed(mix_seed(seed, 0xE5));
  SplitMix64 init_rng(mix_seed(seed, 0x17));
  SplitMix64 sample_rng(mix_seed(seed, 0x5A));
  SplitMix64 shuffle_rng(mix_seed(seed, 0xC3));

  ActorCritic ac{Mlp({obs_dim, hidden, hidden, act_dim}), Mlp({obs_dim, hidden, hidden, 1})};
  ac.actor.init_weights(init_rng, cfg.actor_output_scale);
  ac.critic.init_weights(init_rng);

  Adam opt_actor(ac.actor.param_count());
  Adam opt_critic(ac.critic.param_count());

  const std::size_t batch = static_cast<std::size_t>(cfg.batch_steps);
  std::vector<double> obs_buf(batch * obs_dim);
  std::vector<std::uint8_t> act_buf(batch * act_dim);
  std::vector<double> logp_buf(batch), reward_buf(batch), value_buf(batch);
  std::vector<std::uint8_t> done_buf(batch);
  std::vector<double> advantage(batch), value_target(batch);

  std::vector<double> episode_rewards;
  double episode_sum = 0.0;

  std::vector<double> obs = to_obs(env.reset().activation);
  Action action;
  action.flips.resize(act_dim);
  Mlp::Trace trace;

  std::uint64_t steps_done = 0;
  while (steps_done < cfg.total_timesteps) {
    // --- rollout ---
    for (std::size_t t = 0; t < batch; ++t) {
      std::copy(obs.begin(), obs.end(), obs_buf.begin() + t * obs_dim);

      ac.actor.forward(obs, trace);
      const std::vector<double>& logits = trace.act.back();
      bernoulli_sample(logits, sample_rng, {act_buf.data() + t * act_dim, act_dim});
      logp_buf[t] =
          bernoulli_logprob(logits, {act_buf.data() + t * act_dim, act_dim});
      value_buf[t] = ac.critic.forward(obs)[0];

      std::copy(act_buf.begin() + t * act_dim, act_buf.begin() + (t + 1) * act_dim,
                action.flips.begin());
      const StepResult result = env.step(action);
      reward_buf[t] = result.reward;
      done_buf[t] = result.done ? 1 : 0;
      episode_sum += result.reward;

      if (result.done) {
        episode_rewards.push_back(episode_sum);
        episode_sum = 0.0;
        obs = to_obs(env.reset().activation);
      } else {
        obs = to_obs(result.state.activation);
      }
    }
    steps_done += batch;

    // --- generalized advantage estimation, bootstrapped at truncation ---
    const double bootstrap = ac.critic.forward(obs)[0];
    double gae = 0.0;
    for (std::size_t t = batch; t-- > 0;) {
      const double not_done = done_buf[t] ? 0.0 : 1.0;
      const double next_value = t + 1 < batch ? value_buf[t + 1] : bootstrap;
      // Episodes end by step count, not by reaching an absorbing state, so
      // the finished flag cuts the advantage chain but the final transition
      // still bootstraps nothing (done means the episode truly ended here).
      const double delta = reward_buf[t] + cfg.discount * next_value * not_done - value_buf[t];
      gae = delta + cfg.discount * cfg.gae_decay * not_done * gae;
      advantage[t] = gae;
      value_target[t] = gae + value_buf[t];
    }

    // Batch-level advantage normalization (deterministic, minibatch-order
    // independent).
    double mean = 0.0;
    for (const double a : advantage) mean += a;
    mean /= static_cast<double>(batch);
    double var = 0.0;
    for (const double a : advantage) var += (a - mean) * (a - mean);
    var /= static_cast<double>(batch);
    const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
    for (double& a : advantage) a = (a - mean) * inv_std;

    // --- optimization epochs ---
    std::vector<std::size_t> order(batch);
    for (std::size_t i = 0; i < batch; ++i) order[i] = i;
    std::vector<double> grad_actor(ac.actor.param_count());
    std::vector<double> grad_critic(ac.critic.param_count());

    PpoBatch mini;
    mini.obs_dim = obs_dim;
    mini.act_dim = act_dim;

    for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
      // Fisher-Yates from our own stream; std::shuffle is not portable.
      for (std::size_t i = batch - 1; i > 0; --i)
        std::swap(order[i], order[shuffle_rng.next_below(i + 1)]);

      for (std::size_t start = 0; start < batch; start += cfg.minibatch_size) {
        const std::size_t stop = std::min(batch, start + cfg.minibatch_size);
        const std::size_t count = stop - start;
        mini.obs.assign(count * obs_dim, 0.0);
        mini.actions.assign(count * act_dim, 0);
        mini.old_logprob.resize(count);
        mini.advantage.resize(count);
        mini.value_target.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
          const std::size_t s = order[start + i];
          std::copy_n(obs_buf.begin() + s * obs_dim, obs_dim, mini.obs.begin() + i * obs_dim);
          std::copy_n(act_buf.begin() + s * act_dim, act_dim, mini.actions.begin() + i * act_dim);
          mini.old_logprob[i] = logp_buf[s];
          mini.advantage[i] = advantage[s];
          mini.value_target[i] = value_target[s];
        }

        std::fill(grad_actor.begin(), grad_actor.end(), 0.0);
        std::fill(grad_critic.begin(), grad_critic.end(), 0.0);
        const PpoLossTerms terms = ppo_loss(ac, mini, cfg, grad_actor, grad_critic);
        if (!std::isfinite(terms.total))
          throw DivergenceDetected("non-finite loss after " + std::to_string(steps_done) +
                                   " steps");
        clip_by_global_norm(grad_actor, cfg.max_grad_norm);
        clip_by_global_norm(grad_critic, cfg.max_grad_norm);
        opt_actor.step(ac.actor.params(), grad_actor, cfg.learning_rate);
        opt_critic.step(ac.critic.params(), grad_critic, cfg.learning_rate);
      }
    }
  }

  TrainingResult result;
  result.episode_rewards = std::move(episode_rewards);
  result.snapshot.observation_dim = obs_dim;
  result.snapshot.action_dim = act_dim;
  result.snapshot.hidden_units = cfg.hidden_units;
  result.snapshot.scenario = env.config().scenario;
  result.snapshot.trained_timesteps = steps_done;
  result.snapshot.seed = seed;
  result.snapshot.final_episode_reward =
      result.episode_rewards.empty() ? 0.0 : result.episode_rewards.back();
  const std::span<const double> ap = ac.actor.params();
  const std::span<const double> cp = ac.critic.params();
  result.snapshot.actor_params.assign(ap.begin(), ap.end());
  result.snapshot.critic_params.assign(cp.begin(), cp.end());
  return result;
}

// --- snapshot container ---

ActorCritic PolicySnapshot::instantiate() const {
  const std::size_t hidden = static_cast<std::size_t>(hidden_units);
  ActorCritic ac{Mlp({observation_dim, hidden, hidden, action_dim}),
                 Mlp({observation_dim, hidden, hidden, 1})};
  ac.actor.set_params(actor_params);    // throws ShapeMismatch on bad counts
  ac.critic.set_params(critic_params);
  return ac;
}

namespace {
constexpr char kSnapshotMagic[8] = {'H', 'T', 'W', 'B', 'P', 'O', 'L', '1'};

void write_f64_le(std::ofstream& out, std::span<const double> values) {
  static_assert(sizeof(double) == 8);
  for (const double d : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(buf, 8);
  }
}

std::vector<double> read_f64_le(std::ifstream& in, std::size_t count) {
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    std::memcpy(&values[k], &bits, 8);
  }
  return values;
}
}  // namespace

void PolicySnapshot::save(const std::filesystem::path& path) const {
  const nlohmann::json header = {{"version", version},
                                 {"observation_dim", observation_dim},
                                 {"action_dim", action_dim},
                                 {"hidden_units", hidden_units},
                                 {"scenario", std::string(to_string(scenario))},
                                 {"trained_timesteps", trained_timesteps},
                                 {"seed", seed},
                                 {"final_episode_reward", final_episode_reward},
                                 {"circuit_hash", circuit_hash},
                                 {"config_hash", config_hash},
                                 {"actor_param_count", actor_params.size()},
                                 {"critic_param_count", critic_params.size()}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write policy snapshot: " + path.string());
  out.write(kSnapshotMagic, 8);
  const std::uint32_t len = static_cast<std::uint32_t>(text.size());
  char lenbuf[4];
  for (int i = 0; i < 4; ++i) lenbuf[i] = static_cast<char>((len >> (8 * i)) & 0xff);
  out.write(lenbuf, 4);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_f64_le(out, actor_params);
  write_f64_le(out, critic_params);
  if (!out) throw Error("short write on policy snapshot: " + path.string());
}

PolicySnapshot PolicySnapshot::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open policy snapshot: " + path.string());

  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kSnapshotMagic, 8) != 0)
    throw Error("not a policy snapshot (bad magic): " + path.string());

  unsigned char lenbuf[4];
  in.read(reinterpret_cast<char*>(lenbuf), 4);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(lenbuf[i]) << (8 * i);
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw Error("truncated policy snapshot header: " + path.string());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad policy snapshot header: " + std::string(e.what()));
  }

  PolicySnapshot snap;
  snap.version = header.at("version").get<std::uint32_t>();
  if (snap.version != 1)
    throw Error("unsupported policy snapshot version " + std::to_string(snap.version));
  snap.observation_dim = header.at("observation_dim").get<std::size_t>();
  snap.action_dim = header.at("action_dim").get<std::size_t>();
  snap.hidden_units = header.at("hidden_units").get<int>();
  const auto scenario = scenario_from_name(header.at("scenario").get<std::string>());
  if (!scenario) throw Error("bad scenario in policy snapshot header");
  snap.scenario = *scenario;
  snap.trained_timesteps = header.at("trained_timesteps").get<std::uint64_t>();
  snap.seed = header.at("seed").get<std::uint64_t>();
  snap.final_episode_reward = header.at("final_episode_reward").get<double>();
  snap.circuit_hash = header.value("circuit_hash", "");
  snap.config_hash = header.value("config_hash", "");

  const std::size_t na = header.at("actor_param_count").get<std::size_t>();
  const std::size_t nc = header.at("critic_param_count").get<std::size_t>();
  snap.actor_params = read_f64_le(in, na);
  snap.critic_params = read_f64_le(in, nc);
  if (!in) throw Error("truncated policy snapshot parameters: " + path.string());
  return snap;
}

// --- vector harvesting ---

namespace {

struct PatternHash {
  std::size_t operator()(const Pattern& p) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const std::uint8_t b : p.bits) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

VectorHarvest harvest(Environment& env, const PolicySnapshot& snapshot, std::uint64_t episodes,
                      std::uint64_t budget, std::uint64_t seed) {
  if (snapshot.observation_dim != env.rare_count() || snapshot.action_dim != env.input_count())
    throw ShapeMismatch("policy snapshot dims do not match environment");

  ActorCritic ac = snapshot.instantiate();
  env.reseed(mix_seed(seed, 0x4A));
  SplitMix64 sample_rng(mix_seed(seed, 0x99));

  VectorHarvest out;
  out.cutoff = snapshot.final_episode_reward / static_cast<double>(env.config().episode_len);

  std::unordered_set<Pattern, PatternHash> seen;
  Action action;
  action.flips.resize(env.input_count());
  Mlp::Trace trace;

  for (std::uint64_t ep = 0; ep < episodes && out.vectors.size() < budget; ++ep) {
    std::vector<double> obs = to_obs(env.reset().activation);
    ++out.episodes_run;
    for (int t = 0; t < env.config().episode_len && out.vectors.size() < budget; ++t) {
      ac.actor.forward(obs, trace);
      bernoulli_sample(trace.act.back(), sample_rng, action.flips);
      const StepResult result = env.step(action);
      if (result.reward >= out.cutoff && seen.insert(result.state.pattern).second) {
        out.vectors.push_back(result.state.pattern);
        out.rewards.push_back(result.reward);
      }
      obs = to_obs(result.state.activation);
      if (result.done) break;
    }
  }
  return out;
}

VectorHarvest random_baseline(const Circuit& circuit, std::uint64_t count, std::uint64_t seed) {
  VectorHarvest out;
  out.cutoff = -std::numeric_limits<double>::infinity();

  SplitMix64 rng(mix_seed(seed, 0xB0));
  std::unordered_set<Pattern, PatternHash> seen;
  const std::size_t n = circuit.primary_inputs().size();

  // Small input spaces can't supply `count` distinct patterns; the attempt
  // bound keeps this terminating instead of spinning.
  const std::uint64_t max_attempts = count * 64 + 1024;
  Pattern p;
  p.bits.resize(n);
  for (std::uint64_t attempt = 0; attempt < max_attempts && out.vectors.size() < count;
       ++attempt) {
    for (auto& b : p.bits) b = rng.next_bool();
    if (seen.insert(p).second) {
      out.vectors.push_back(p);
      out.rewards.push_back(0.0);
    }
  }
  return out;
}

}  // namespace htwb
