#ifndef FWDLEARN_SAC_H_
#define FWDLEARN_SAC_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fwdlearn/adam.h"
#include "fwdlearn/checkpoint.h"
#include "fwdlearn/mlp.h"
#include "fwdlearn/policy.h"
#include "fwdlearn/replay_buffer.h"

namespace fwdlearn {

struct SacConfig {
  int batch_size = 1024;
  int n_quantiles = 64;
  double gamma = 0.99;
  double tau_soft = 0.005;
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  double lr_alpha = 3e-4;
  // unset means -action_dim
  std::optional<double> target_entropy;
  int updates_per_episode = 10;
  std::size_t buffer_capacity = 1000000;
  std::vector<int> hidden = {64, 64};
  double initial_alpha = 1.0;
  double kappa = 1.0;

  void Validate() const;
};

struct UpdateStats {
  bool skipped = false;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
};

// column-per-sample view of a replay sample
struct TransitionBatch {
  Eigen::MatrixXd obs;          // I x B, encoded
  Eigen::MatrixXd action;       // A x B, normalized to [-1, 1]
  Eigen::RowVectorXd reward;
  Eigen::RowVectorXd terminal;  // 1 or 0
  Eigen::MatrixXd next_obs;
};

TransitionBatch GatherBatch(const ReplayBuffer& buffer,
                            const std::vector<std::size_t>& indices,
                            const ActionBounds& bounds);

// critics see [encoded obs; normalized action]
Eigen::MatrixXd CriticInput(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& action);

// Quantile Huber regression of a critic onto fixed targets (M x B).
double CriticLoss(const MlpParams& critic, const Eigen::MatrixXd& input,
                  const Eigen::MatrixXd& targets, const Eigen::VectorXd& taus,
                  double kappa, MlpGrads* grads = nullptr);

// mean over the batch of alpha * log_prob - min_k mean-quantile Q_k, with the
// action reparameterized from the given standard-normal noise
double ActorLoss(const MlpParams& actor, const std::array<const MlpParams*, 2>& critics,
                 const ActionBounds& bounds, const Eigen::MatrixXd& obs,
                 const Eigen::MatrixXd& noise, double alpha, MlpGrads* grads = nullptr,
                 Eigen::RowVectorXd* log_prob = nullptr);

// Distributional backup. Per sample the target critic with the smaller mean
// quantile is used: r + gamma * (1 - terminal) * (q - alpha * log_prob').
Eigen::MatrixXd CriticTargets(const MlpParams& actor,
                              const std::array<const MlpParams*, 2>& target_critics,
                              const ActionBounds& bounds, const TransitionBatch& batch,
                              const Eigen::MatrixXd& next_noise, double alpha,
                              double gamma);

class SacAgent {
 public:
  SacAgent(const Scaler& scaler, const ActionBounds& bounds, int window_w,
           SacConfig config, Rng& rng);

  // explore: stochastic sample; otherwise tanh(mean)
  Eigen::VectorXd SampleAction(const StackedObservation& obs, bool explore, Rng& rng) const;

  // One gradient step for the critics, the actor and the temperature, then
  // a soft target update. Skipped while the buffer holds < batch_size.
  UpdateStats Update(const ReplayBuffer& buffer, Rng& rng);

  void SoftUpdateTargets(double tau);

  Checkpoint ToCheckpoint(std::uint64_t rounds, const std::string& config_echo) const;
  static SacAgent FromCheckpoint(const Checkpoint& ckpt, SacConfig config);

  const Policy& policy() const { return policy_; }
  const MlpParams& actor() const { return policy_.actor; }
  const MlpParams& critic(int k) const { return critics_.at(k); }
  const MlpParams& target_critic(int k) const { return targets_.at(k); }
  MlpParams& mutable_critic(int k) { return critics_.at(k); }
  double log_alpha() const { return log_alpha_; }
  double alpha() const;
  double target_entropy() const { return target_entropy_; }
  const SacConfig& config() const { return config_; }
  const Eigen::VectorXd& taus() const { return taus_; }
  std::int64_t updates() const { return actor_opt_.step; }

  // all trainable and optimizer state, for checksums
  Eigen::VectorXd FlattenAll() const;

 private:
  SacAgent() = default;

  SacConfig config_;
  Policy policy_;
  std::array<MlpParams, 2> critics_;
  std::array<MlpParams, 2> targets_;
  AdamState actor_opt_;
  std::array<AdamState, 2> critic_opt_;
  double log_alpha_ = 0.0;
  ScalarAdamState alpha_opt_;
  double target_entropy_ = 0.0;
  Eigen::VectorXd taus_;
};

class SacPolicy : public DeltaPolicy {
 public:
  explicit SacPolicy(const SacAgent& agent) : agent_(agent) {}
  Eigen::VectorXd Act(const FwdEnv&, const StackedObservation& obs, bool explore,
                      Rng& rng) override {
    return agent_.SampleAction(obs, explore, rng);
  }

 private:
  const SacAgent& agent_;
};

}  // namespace fwdlearn

#endif  // FWDLEARN_SAC_H_
