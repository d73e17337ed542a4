#pragma once

#include <cstring>
#include <optional>
#include <ostream>

#include "odec/irl/discriminator.hpp"
#include "odec/rl/ppo.hpp"

namespace odec::irl {

struct AirlConfig {
  rl::TrainingConfig generator;  // total_steps counts generator environment steps
  int discriminator_epochs = 2;
  int generator_epochs = 4;
  double discriminator_lr = 1e-3;
  int discriminator_minibatch = 256;
  rl::NetworkShape discriminator_network;
  /// Halt once discriminator accuracy stays at 1.0 for this many iterations (0 disables).
  int collapse_patience = 25;
};

/// FNV-1a over the raw parameter bytes; used to audit which phase touched which network.
inline std::uint64_t parameter_hash(const nn::Mlp& net) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(net.parameters().data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(net.parameter_count()) * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t parameter_hash(const rl::PolicyVector& p) {
  std::uint64_t h = parameter_hash(p.critic());
  for (int i = 0; i < p.agent_count(); ++i) h = h * 31 + parameter_hash(p.actor(i));
  return h;
}

struct IterationDiagnostics {
  long step = 0;
  double discriminator_loss = 0.0;
  double discriminator_accuracy = 0.0;
  double generator_reward = 0.0;  // recent mean designed episode reward
  double learned_reward = 0.0;    // mean f − log π over the rollout
  // Parameter hashes at phase boundaries.
  std::uint64_t disc_before = 0, disc_after_disc = 0, disc_after_gen = 0;
  std::uint64_t policy_before = 0, policy_after_disc = 0, policy_after_gen = 0;
};

inline void write_diagnostics_csv(std::ostream& os, const std::vector<IterationDiagnostics>& d) {
  os << "step,discriminator_loss,discriminator_accuracy,generator_reward,learned_reward\n";
  for (const auto& x : d)
    os << x.step << ',' << x.discriminator_loss << ',' << x.discriminator_accuracy << ',' << x.generator_reward << ','
       << x.learned_reward << '\n';
}

struct AirlResult {
  LearnedReward reward;
  rl::PolicyVector policies;
  std::vector<IterationDiagnostics> diagnostics;
  bool collapsed = false;
};

/// Adversarial training over ⟨c, s, a⟩ triples.
///
///   1  initialise policies and discriminator
///   2  repeat until the step budget is spent:
///   3    roll out the current policies
///   4    draw expert and generator minibatches
///   5-6  train the discriminator (BCE, expert = 1)
///   7    relabel rollout rewards with f − log π under the current policies
///   8-9  train the policies with clipped PPO on those rewards
///   11 return the frozen reward and the policies
class AirlTrainer {
 public:
  AirlTrainer(const Environment& env, const std::vector<OpenTrajectory>& expert, AirlConfig cfg)
      : cfg_(std::move(cfg)),
        ppo_(env, cfg_.generator),
        disc_(env, cfg_.discriminator_network, mix_seed(cfg_.generator.seed, 4242), cfg_.discriminator_lr),
        rng_(mix_seed(cfg_.generator.seed, 31337)) {
    const TrajectoryLimits limits{env.local_size(), env.action_count()};
    for (const auto& traj : expert) {
      const auto v = validate_trajectory(traj, env.registry(), limits);
      if (!v.empty())
        throw Error(ErrorCode::SchemaError, "expert trajectory does not match the environment: " + v.front().detail);
      for (const auto& rec : traj.records) expert_.push_back({rec.state, rec.action});
    }
    if (expert_.empty()) throw Error(ErrorCode::EmptyBatch, "no expert samples");
  }

  const rl::PolicyVector& policies() const noexcept { return ppo_.policies(); }
  const DiscriminatorModel& discriminator() const noexcept { return disc_; }
  long steps() const noexcept { return ppo_.steps(); }

  IterationDiagnostics iterate() {
    IterationDiagnostics d;
    auto& policies = ppo_.policies();
    LogPiFn log_pi = [&](const TeamState& s, const TeamAction& a) { return policies.joint_log_prob(s, a); };

    const int n = static_cast<int>(std::min<long>(cfg_.generator.rollout,
                                                  std::max<long>(1, cfg_.generator.total_steps - ppo_.steps())));
    rl::RolloutBuffer buf = ppo_.collect(n);

    d.disc_before = parameter_hash(disc_.net());
    d.policy_before = parameter_hash(policies);
    std::vector<Sample> generated;
    generated.reserve(buf.size());
    for (const auto& tr : buf.steps) generated.push_back({tr.state, tr.action});
    std::vector<std::size_t> order(generated.size());
    std::iota(order.begin(), order.end(), 0);
    std::uniform_int_distribution<std::size_t> pick_expert(0, expert_.size() - 1);
    long batches = 0;
    for (int epoch = 0; epoch < cfg_.discriminator_epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng_);
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg_.discriminator_minibatch)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg_.discriminator_minibatch));
        std::vector<const Sample*> gen, exp;
        for (std::size_t r = start; r < end; ++r) {
          gen.push_back(&generated[order[r]]);
          exp.push_back(&expert_[pick_expert(rng_)]);
        }
        const DiscriminatorLoss l = discriminator_update(disc_, exp, gen, log_pi);
        d.discriminator_loss += l.loss;
        d.discriminator_accuracy += l.accuracy;
        ++batches;
      }
    }
    if (batches > 0) {
      d.discriminator_loss /= double(batches);
      d.discriminator_accuracy /= double(batches);
    }
    d.disc_after_disc = parameter_hash(disc_.net());
    d.policy_after_disc = parameter_hash(policies);

    relabel(buf);
    for (const auto& tr : buf.steps) d.learned_reward += tr.reward;
    d.learned_reward /= double(std::max<std::size_t>(1, buf.size()));
    ppo_.update(buf, cfg_.generator_epochs);
    for (double r : buf.episode_returns) recent_.push_back(r);
    if (recent_.size() > 100) recent_.erase(recent_.begin(), recent_.end() - 100);
    d.generator_reward = recent_.empty() ? 0.0 : std::accumulate(recent_.begin(), recent_.end(), 0.0) / double(recent_.size());

    d.disc_after_gen = parameter_hash(disc_.net());
    d.policy_after_gen = parameter_hash(policies);
    d.step = ppo_.steps();
    return d;
  }

  AirlResult train() {
    AirlResult out;
    int pinned = 0;
    while (ppo_.steps() < cfg_.generator.total_steps) {
      if (cfg_.generator.anneal) anneal();
      out.diagnostics.push_back(iterate());
      pinned = out.diagnostics.back().discriminator_accuracy >= 1.0 ? pinned + 1 : 0;
      if (cfg_.collapse_patience > 0 && pinned >= cfg_.collapse_patience) {
        out.collapsed = true;
        break;
      }
    }
    out.reward = LearnedReward(disc_);
    out.policies = ppo_.policies();
    return out;
  }

 private:
  /// r_t ← f_θ(c, s, a) − log π(a | c, s), with π the current policies.
  void relabel(rl::RolloutBuffer& buf) const {
    std::vector<const Sample*> ptrs;
    std::vector<Sample> samples;
    samples.reserve(buf.size());
    for (const auto& tr : buf.steps) samples.push_back({tr.state, tr.action});
    for (const auto& s : samples) ptrs.push_back(&s);
    const Matrix f = disc_.net().forward(disc_.inputs(ptrs));
    for (std::size_t i = 0; i < buf.size(); ++i) {
      auto& tr = buf.steps[i];
      tr.reward = extract_reward(f(0, static_cast<Eigen::Index>(i)), ppo_.policies().joint_log_prob(tr.state, tr.action));
    }
  }

  void anneal() {
    const double frac = 1.0 - double(ppo_.steps()) / double(std::max<long>(1, cfg_.generator.total_steps));
    ppo_.set_learning_rate_fraction(frac);
  }

  AirlConfig cfg_;
  rl::PpoTrainer ppo_;
  DiscriminatorModel disc_;
  std::mt19937_64 rng_;
  std::vector<Sample> expert_;
  std::vector<double> recent_;
};

inline AirlResult train_odec_airl(const Environment& env, const std::vector<OpenTrajectory>& expert,
                                  const AirlConfig& cfg) {
  AirlTrainer trainer(env, expert, cfg);
  return trainer.train();
}

}  // namespace odec::irl
