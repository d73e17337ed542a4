#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <vector>

#include "odec/nn/adam.hpp"
#include "odec/rl/policy.hpp"

namespace odec::rl {

struct Transition {
  TeamState state;
  TeamAction action;
  std::vector<double> log_probs;  // per active member, at sampling time
  double reward = 0.0;            // reward used for training (may be relabelled)
  double env_reward = 0.0;        // designed reward returned by the simulator
  bool done = false;              // episode ended here (task finished or horizon)
  bool terminal = false;          // task finished here
  bool boundary = false;          // rollout cut an unfinished episode here
};

struct RolloutBuffer {
  std::vector<Transition> steps;
  std::vector<double> value_targets;
  std::vector<double> advantages;
  /// Designed returns and lengths of episodes completed inside this buffer.
  std::vector<double> episode_returns;
  std::vector<int> episode_lengths;

  std::size_t size() const noexcept { return steps.size(); }
  bool empty() const noexcept { return steps.empty(); }
  bool has_targets() const noexcept { return !steps.empty() && value_targets.size() == steps.size(); }
};

struct TrainingConfig {
  double discount = 0.99;
  double clip = 0.2;
  double entropy_coef = 0.01;
  int epochs = 4;
  int minibatch = 64;
  int rollout = 2048;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double max_grad_norm = 0.5;
  /// Learning rates decay linearly to zero over total_steps.
  bool anneal = true;
  long total_steps = 200000;
  std::uint64_t seed = 0;
  NetworkShape network;

  void validate() const {
    if (!(discount > 0.0 && discount < 1.0) && discount != 0.0)
      throw Error(ErrorCode::SchemaError, "discount must lie in [0,1)");
    if (!(clip > 0.0 && clip < 1.0)) throw Error(ErrorCode::SchemaError, "clip must lie in (0,1)");
    if (entropy_coef < 0.0) throw Error(ErrorCode::SchemaError, "entropy coefficient must be non-negative");
    if (epochs < 1 || minibatch < 1 || rollout < 1) throw Error(ErrorCode::SchemaError, "epochs, minibatch and rollout must be positive");
    if (actor_lr <= 0.0 || critic_lr <= 0.0) throw Error(ErrorCode::SchemaError, "learning rates must be positive");
  }
};

/// Persistent collection state: the environment keeps running across calls.
struct RolloutCursor {
  bool started = false;
  TeamState state;
  double episode_return = 0.0;
  int episode_length = 0;
};

/// Samples `n_steps` transitions. Episodes reset on done with a seed drawn
/// from `rng`; an episode still running at the end is marked as a boundary
/// and resumed by the next call through `cursor`.
template <class Rng>
RolloutBuffer collect_rollouts(const PolicyVector& policies, Environment& env, int n_steps, Rng& rng,
                               RolloutCursor& cursor) {
  RolloutBuffer buf;
  buf.steps.reserve(static_cast<std::size_t>(std::max(n_steps, 0)));
  for (int t = 0; t < n_steps; ++t) {
    if (!cursor.started) {
      cursor.state = env.reset(rng());
      cursor.started = true;
      cursor.episode_return = 0.0;
      cursor.episode_length = 0;
    }
    JointSample js = policies.act(cursor.state, rng);
    StepResult r = env.step(js.action);
    Transition tr{cursor.state, std::move(js.action), std::move(js.log_probs), r.reward, r.reward, r.done, r.terminal, false};
    cursor.episode_return += r.reward;
    ++cursor.episode_length;
    if (r.done) {
      buf.episode_returns.push_back(cursor.episode_return);
      buf.episode_lengths.push_back(cursor.episode_length);
      cursor.started = false;
    } else {
      cursor.state = std::move(r.state);
    }
    buf.steps.push_back(std::move(tr));
  }
  if (!buf.steps.empty() && !buf.steps.back().done) buf.steps.back().boundary = true;
  return buf;
}

template <class Rng>
RolloutBuffer collect_rollouts(const PolicyVector& policies, Environment& env, int n_steps, Rng& rng) {
  RolloutCursor cursor;
  return collect_rollouts(policies, env, n_steps, rng, cursor);
}

inline Matrix critic_inputs(const Featurizer& f, const std::vector<Transition>& steps) {
  Matrix x(f.critic_size(), static_cast<Eigen::Index>(steps.size()));
  for (std::size_t j = 0; j < steps.size(); ++j)
    f.critic_features(steps[j].state, std::span<double>(x.col(static_cast<Eigen::Index>(j)).data(),
                                                        static_cast<std::size_t>(x.rows())));
  return x;
}

/// Per-episode discounted reward-to-go and baseline-subtracted advantages,
/// normalized to zero mean and unit variance when there are at least two samples.
inline void compute_targets(RolloutBuffer& buf, double discount, const nn::Mlp& critic, const Featurizer& features) {
  const std::size_t n = buf.steps.size();
  buf.value_targets.assign(n, 0.0);
  buf.advantages.assign(n, 0.0);
  if (n == 0) return;
  if (!buf.steps.back().done && !buf.steps.back().boundary)
    throw Error(ErrorCode::MalformedBuffer, "last transition carries no episode boundary");
  double g = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const auto& tr = buf.steps[i];
    if (tr.done || tr.boundary) g = 0.0;
    g = tr.reward + discount * g;
    buf.value_targets[i] = g;
  }
  const Matrix values = critic.forward(critic_inputs(features, buf.steps));
  for (std::size_t i = 0; i < n; ++i) buf.advantages[i] = buf.value_targets[i] - values(0, static_cast<Eigen::Index>(i));
  if (n >= 2) {
    const double mean = std::accumulate(buf.advantages.begin(), buf.advantages.end(), 0.0) / double(n);
    double var = 0.0;
    for (double a : buf.advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / double(n));
    for (double& a : buf.advantages) a = (a - mean) / (sd + 1e-8);
  }
}

struct AgentLoss {
  double clip_loss = 0.0;
  double entropy = 0.0;
  long samples = 0;
};

struct UpdateReport {
  std::vector<AgentLoss> agents;
  double value_loss = 0.0;
};

struct Optimizers {
  std::vector<nn::AdamState> actors;
  nn::AdamState critic;

  Optimizers() = default;
  Optimizers(const PolicyVector& p, const TrainingConfig& cfg) : critic(p.critic().parameter_count(), cfg.critic_lr) {
    for (int i = 0; i < p.agent_count(); ++i) actors.emplace_back(p.actor(i).parameter_count(), cfg.actor_lr);
  }
};

/// Clipped-surrogate loss for one agent over a minibatch and its gradient with
/// respect to the actor's parameters. `rows` index into the buffer; `slots`
/// give the agent's position in each sample's team.
struct ActorBatch {
  Matrix inputs;
  std::vector<int> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
};

struct ActorLoss {
  double loss = 0.0;      // −(mean surrogate) − σ·mean entropy
  double surrogate = 0.0;
  double entropy = 0.0;
  Vector gradient;
};

inline ActorLoss actor_loss(const nn::Mlp& actor, const ActorBatch& b, const std::vector<bool>& mask, double clip,
                            double entropy_coef) {
  nn::ForwardCache cache;
  const Matrix logits = actor.forward(b.inputs, &cache);
  const auto m = static_cast<Eigen::Index>(b.actions.size());
  Matrix upstream(logits.rows(), m);
  ActorLoss out;
  for (Eigen::Index j = 0; j < m; ++j) {
    nn::Categorical dist(logits.col(j), mask);
    const int a = b.actions[static_cast<std::size_t>(j)];
    const double adv = b.advantages[static_cast<std::size_t>(j)];
    const double ratio = std::exp(dist.log_prob(a) - b.old_log_probs[static_cast<std::size_t>(j)]);
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
    const double surrogate = std::min(ratio * adv, clipped * adv);
    out.surrogate += surrogate;
    out.entropy += dist.entropy();
    // d(−surrogate − σH)/d logits; zero through the ratio once the clipped branch is selected.
    const bool flat = (adv > 0.0 && ratio > 1.0 + clip) || (adv < 0.0 && ratio < 1.0 - clip);
    Vector g = -entropy_coef * dist.entropy_gradient();
    if (!flat) g -= adv * ratio * dist.log_prob_gradient(a);
    upstream.col(j) = g / double(m);
  }
  out.surrogate /= double(m);
  out.entropy /= double(m);
  out.loss = -out.surrogate - entropy_coef * out.entropy;
  out.gradient = actor.backward(cache, upstream);
  return out;
}

/// Several epochs of shuffled minibatch updates on a buffer with targets.
template <class Rng>
UpdateReport ppo_update(PolicyVector& policies, Optimizers& opt, const RolloutBuffer& buf, const TrainingConfig& cfg,
                        Rng& rng) {
  if (!buf.has_targets()) throw Error(ErrorCode::MalformedBuffer, "compute_targets must run before ppo_update");
  const Featurizer& f = policies.features();
  const int n_agents = policies.agent_count();
  UpdateReport report;
  report.agents.assign(static_cast<std::size_t>(n_agents), {});
  long value_batches = 0;

  const Matrix all_critic = critic_inputs(f, buf.steps);
  std::vector<std::size_t> order(buf.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch));
      const auto m = static_cast<Eigen::Index>(end - start);

      for (AgentId i = 0; i < n_agents; ++i) {
        ActorBatch b;
        std::vector<Vector> cols;
        for (std::size_t r = start; r < end; ++r) {
          const auto& tr = buf.steps[order[r]];
          const int slot = f.registry().slot_of(tr.state.team, i);
          if (slot < 0) continue;
          cols.push_back(f.actor_features(tr.state.team, tr.state.locals[static_cast<std::size_t>(slot)]));
          b.actions.push_back(tr.action.actions[static_cast<std::size_t>(slot)]);
          b.old_log_probs.push_back(tr.log_probs[static_cast<std::size_t>(slot)]);
          b.advantages.push_back(buf.advantages[order[r]]);
        }
        if (cols.empty()) continue;
        b.inputs.resize(f.actor_size(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) b.inputs.col(static_cast<Eigen::Index>(j)) = cols[j];
        ActorLoss l = actor_loss(policies.actor(i), b, policies.action_mask(), cfg.clip, cfg.entropy_coef);
        if (!std::isfinite(l.loss) || !l.gradient.allFinite())
          throw Error(ErrorCode::NonFiniteLoss, "actor " + std::to_string(i) + " produced a non-finite loss");
        if (cfg.max_grad_norm > 0.0) nn::clip_grad_norm(l.gradient, cfg.max_grad_norm);
        nn::adam_step(policies.actor(i), l.gradient, opt.actors[static_cast<std::size_t>(i)]);
        auto& rep = report.agents[static_cast<std::size_t>(i)];
        rep.clip_loss += -l.surrogate * double(cols.size());
        rep.entropy += l.entropy * double(cols.size());
        rep.samples += static_cast<long>(cols.size());
      }

      Matrix x(all_critic.rows(), m);
      Matrix target(1, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        x.col(j) = all_critic.col(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(j)]));
        target(0, j) = buf.value_targets[order[start + static_cast<std::size_t>(j)]];
      }
      nn::ForwardCache cache;
      const Matrix v = policies.critic().forward(x, &cache);
      const Matrix diff = v - target;
      const double vloss = diff.squaredNorm() / double(m);
      if (!std::isfinite(vloss)) throw Error(ErrorCode::NonFiniteLoss, "critic produced a non-finite loss");
      Vector g = policies.critic().backward(cache, 2.0 * diff / double(m));
      if (cfg.max_grad_norm > 0.0) nn::clip_grad_norm(g, cfg.max_grad_norm);
      nn::adam_step(policies.critic(), g, opt.critic);
      report.value_loss += vloss;
      ++value_batches;
    }
  }
  for (auto& a : report.agents)
    if (a.samples > 0) {
      a.clip_loss /= double(a.samples);
      a.entropy /= double(a.samples);
    }
  if (value_batches > 0) report.value_loss /= double(value_batches);
  return report;
}

struct CurvePoint {
  long step = 0;
  double mean_episode_reward = 0.0;
  std::vector<double> entropy;
  double value_loss = 0.0;
};

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve, int agents) {
  os << "step,mean_episode_reward";
  for (int i = 0; i < agents; ++i) os << ",entropy_" << i;
  os << ",value_loss\n";
  for (const auto& p : curve) {
    os << p.step << ',' << p.mean_episode_reward;
    for (double e : p.entropy) os << ',' << e;
    os << ',' << p.value_loss << '\n';
  }
}

/// Replaces training rewards in a freshly collected buffer (used by adversarial training).
using RewardHook = std::function<void(RolloutBuffer&, const PolicyVector&)>;

struct TrainResult {
  PolicyVector policies;
  std::vector<CurvePoint> curve;
};

/// Single-threaded trainer; identical seeds give identical results.
class PpoTrainer {
 public:
  PpoTrainer(const Environment& env, TrainingConfig cfg)
      : cfg_(std::move(cfg)), env_(env.clone()), policies_(env, cfg_.network, cfg_.seed), opt_(policies_, cfg_),
        rng_(mix_seed(cfg_.seed, 77)) {
    cfg_.validate();
  }

  PolicyVector& policies() noexcept { return policies_; }
  const PolicyVector& policies() const noexcept { return policies_; }
  const TrainingConfig& config() const noexcept { return cfg_; }
  long steps() const noexcept { return steps_; }
  std::mt19937_64& rng() noexcept { return rng_; }

  /// Collects `n` transitions and counts them against the step budget.
  RolloutBuffer collect(int n) {
    RolloutBuffer buf = collect_rollouts(policies_, *env_, n, rng_, cursor_);
    steps_ += n;
    return buf;
  }

  void set_learning_rate_fraction(double frac) {
    for (auto& a : opt_.actors) a.lr = cfg_.actor_lr * frac;
    opt_.critic.lr = cfg_.critic_lr * frac;
  }

  /// Targets plus `epochs` of clipped updates on `buf`.
  UpdateReport update(RolloutBuffer& buf, int epochs) {
    compute_targets(buf, cfg_.discount, policies_.critic(), policies_.features());
    TrainingConfig c = cfg_;
    c.epochs = epochs;
    return ppo_update(policies_, opt_, buf, c, rng_);
  }

  /// One collect / relabel / update round; returns the curve point.
  CurvePoint iterate(const RewardHook& hook = {}) {
    const int n = static_cast<int>(std::min<long>(cfg_.rollout, std::max<long>(1, cfg_.total_steps - steps_)));
    if (cfg_.anneal) set_learning_rate_fraction(1.0 - double(steps_) / double(std::max<long>(1, cfg_.total_steps)));
    RolloutBuffer buf = collect(n);
    if (hook) hook(buf, policies_);
    const UpdateReport rep = update(buf, cfg_.epochs);
    CurvePoint p{steps_, recent_mean(buf), {}, rep.value_loss};
    for (const auto& a : rep.agents) p.entropy.push_back(a.entropy);
    return p;
  }

  TrainResult train(const RewardHook& hook = {}) {
    std::vector<CurvePoint> curve;
    while (steps_ < cfg_.total_steps) curve.push_back(iterate(hook));
    return {policies_, std::move(curve)};
  }

 private:
  double recent_mean(const RolloutBuffer& buf) {
    for (double r : buf.episode_returns) recent_.push_back(r);
    if (recent_.size() > 100) recent_.erase(recent_.begin(), recent_.end() - 100);
    if (recent_.empty()) return 0.0;
    return std::accumulate(recent_.begin(), recent_.end(), 0.0) / double(recent_.size());
  }

  TrainingConfig cfg_;
  std::unique_ptr<Environment> env_;
  PolicyVector policies_;
  Optimizers opt_;
  std::mt19937_64 rng_;
  RolloutCursor cursor_;
  long steps_ = 0;
  std::vector<double> recent_;
};

inline TrainResult train_odec_ppo(const Environment& env, const TrainingConfig& cfg) {
  PpoTrainer trainer(env, cfg);
  return trainer.train();
}

}  // namespace odec::rl
