#include "fwdlearn/sac.h"

#include <cmath>
#include <sstream>

#include "fwdlearn/quantile.h"
#include "fwdlearn/status.h"

namespace fwdlearn {
namespace {

Eigen::MatrixXd NormalNoise(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  // column-major fill keeps the draw order stable
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = StandardNormal(rng);
  }
  return m;
}

void RequireFinite(double value, const char* what, std::int64_t step) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-finite " << what << " (" << value << ") at update " << step;
    throw TrainingFault(msg.str());
  }
}

}  // namespace

void SacConfig::Validate() const {
  if (batch_size < 1) throw ConfigError("sac batch_size must be >= 1");
  if (n_quantiles < 1) throw ConfigError("n_quantiles must be >= 1");
  // gamma = 0 is allowed for one-step (bandit) sanity runs
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
  if (!(tau_soft > 0.0 && tau_soft <= 1.0)) throw ConfigError("tau_soft must be in (0, 1]");
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0) || !(lr_alpha > 0.0)) {
    throw ConfigError("learning rates must be > 0");
  }
  if (updates_per_episode < 1) throw ConfigError("updates_per_episode must be >= 1");
  if (buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1");
  if (!(initial_alpha > 0.0)) throw ConfigError("initial_alpha must be > 0");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden widths must be >= 1");
  }
}

TransitionBatch GatherBatch(const ReplayBuffer& buffer,
                            const std::vector<std::size_t>& indices,
                            const ActionBounds& bounds) {
  if (indices.empty()) throw ContractViolation("empty batch");
  const ReplayTransition& first = buffer.at(indices.front());
  const Eigen::Index b = static_cast<Eigen::Index>(indices.size());
  TransitionBatch batch;
  batch.obs.resize(first.obs.size(), b);
  batch.next_obs.resize(first.next_obs.size(), b);
  batch.action.resize(first.action.size(), b);
  batch.reward.resize(b);
  batch.terminal.resize(b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const ReplayTransition& t = buffer.at(indices[j]);
    batch.obs.col(j) = t.obs;
    batch.next_obs.col(j) = t.next_obs;
    batch.action.col(j) = bounds.Normalize(t.action);
    batch.reward[j] = t.reward;
    batch.terminal[j] = t.terminal ? 1.0 : 0.0;
  }
  return batch;
}

Eigen::MatrixXd CriticInput(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& action) {
  if (obs.cols() != action.cols()) throw ContractViolation("obs/action batch mismatch");
  Eigen::MatrixXd input(obs.rows() + action.rows(), obs.cols());
  input.topRows(obs.rows()) = obs;
  input.bottomRows(action.rows()) = action;
  return input;
}

double CriticLoss(const MlpParams& critic, const Eigen::MatrixXd& input,
                  const Eigen::MatrixXd& targets, const Eigen::VectorXd& taus,
                  double kappa, MlpGrads* grads) {
  MlpTape tape;
  const Eigen::MatrixXd q = Forward(critic, input, grads ? &tape : nullptr);
  Eigen::MatrixXd d_q;
  const double loss = QuantileHuberLossBatch(q, targets, taus, kappa, grads ? &d_q : nullptr);
  if (grads) *grads = Backward(critic, tape, d_q);
  return loss;
}

double ActorLoss(const MlpParams& actor, const std::array<const MlpParams*, 2>& critics,
                 const ActionBounds& bounds, const Eigen::MatrixXd& obs,
                 const Eigen::MatrixXd& noise, double alpha, MlpGrads* grads,
                 Eigen::RowVectorXd* log_prob) {
  const Eigen::Index b = obs.cols();
  const Eigen::Index a = bounds.dim();
  MlpTape actor_tape;
  const Eigen::MatrixXd raw = Forward(actor, obs, grads ? &actor_tape : nullptr);
  const SquashedBatch sample = SquashedGaussianForward(raw, bounds, noise);
  const Eigen::MatrixXd input = CriticInput(obs, sample.squashed);

  std::array<MlpTape, 2> tapes;
  std::array<Eigen::RowVectorXd, 2> mean_q;
  for (int k = 0; k < 2; ++k) {
    mean_q[k] = Forward(*critics[k], input, grads ? &tapes[k] : nullptr).colwise().mean();
  }
  // ties go to the first critic
  Eigen::Array<bool, 1, Eigen::Dynamic> pick_second =
      mean_q[1].array() < mean_q[0].array();
  const Eigen::RowVectorXd min_q = mean_q[0].cwiseMin(mean_q[1]);
  const double loss = (alpha * sample.log_prob - min_q).mean();
  if (log_prob) *log_prob = sample.log_prob;
  if (!grads) return loss;

  const Eigen::Index n = critics[0]->shape.output;
  const Eigen::RowVectorXd d_log_prob = Eigen::RowVectorXd::Constant(b, alpha / b);
  Eigen::MatrixXd d_squashed = Eigen::MatrixXd::Zero(a, b);
  for (int k = 0; k < 2; ++k) {
    Eigen::MatrixXd d_q = Eigen::MatrixXd::Zero(n, b);
    bool used = false;
    for (Eigen::Index j = 0; j < b; ++j) {
      if (pick_second[j] == (k == 1)) {
        d_q.col(j).setConstant(-1.0 / static_cast<double>(b * n));
        used = true;
      }
    }
    if (!used) continue;
    Eigen::MatrixXd d_input;
    Backward(*critics[k], tapes[k], d_q, &d_input);
    d_squashed += d_input.bottomRows(a);
  }
  const Eigen::MatrixXd d_raw = SquashedGaussianBackward(sample, d_squashed, d_log_prob);
  *grads = Backward(actor, actor_tape, d_raw);
  return loss;
}

Eigen::MatrixXd CriticTargets(const MlpParams& actor,
                              const std::array<const MlpParams*, 2>& target_critics,
                              const ActionBounds& bounds, const TransitionBatch& batch,
                              const Eigen::MatrixXd& next_noise, double alpha,
                              double gamma) {
  const Eigen::MatrixXd raw = Forward(actor, batch.next_obs);
  const SquashedBatch next = SquashedGaussianForward(raw, bounds, next_noise);
  const Eigen::MatrixXd input = CriticInput(batch.next_obs, next.squashed);
  const Eigen::MatrixXd q0 = Forward(*target_critics[0], input);
  const Eigen::MatrixXd q1 = Forward(*target_critics[1], input);
  const Eigen::RowVectorXd m0 = q0.colwise().mean();
  const Eigen::RowVectorXd m1 = q1.colwise().mean();

  Eigen::MatrixXd targets(q0.rows(), q0.cols());
  for (Eigen::Index j = 0; j < q0.cols(); ++j) {
    const auto& q = m1[j] < m0[j] ? q1 : q0;
    const double keep = gamma * (1.0 - batch.terminal[j]);
    targets.col(j) = (batch.reward[j] +
                      keep * (q.col(j).array() - alpha * next.log_prob[j])).matrix();
  }
  return targets;
}

SacAgent::SacAgent(const Scaler& scaler, const ActionBounds& bounds, int window_w,
                   SacConfig config, Rng& rng)
    : config_(std::move(config)) {
  config_.Validate();
  policy_ = Policy::Create(scaler, bounds, window_w, config_.hidden, rng);
  const MlpShape critic_shape{policy_.actor.shape.input + bounds.dim(), config_.hidden,
                              config_.n_quantiles};
  for (int k = 0; k < 2; ++k) {
    critics_[k] = MlpParams::Init(critic_shape, rng);
    targets_[k] = critics_[k];
    critic_opt_[k] = AdamState::For(critics_[k]);
  }
  actor_opt_ = AdamState::For(policy_.actor);
  log_alpha_ = std::log(config_.initial_alpha);
  target_entropy_ = config_.target_entropy.value_or(-static_cast<double>(bounds.dim()));
  taus_ = QuantileFractions(config_.n_quantiles);
}

double SacAgent::alpha() const { return std::exp(log_alpha_); }

Eigen::VectorXd SacAgent::SampleAction(const StackedObservation& obs, bool explore,
                                       Rng& rng) const {
  return policy_.Act(obs, explore, rng);
}

UpdateStats SacAgent::Update(const ReplayBuffer& buffer, Rng& rng) {
  UpdateStats stats;
  stats.alpha = alpha();
  if (buffer.size() < static_cast<std::size_t>(config_.batch_size)) {
    stats.skipped = true;
    return stats;
  }
  const ActionBounds& bounds = policy_.bounds;
  const auto indices = buffer.SampleIndices(config_.batch_size, rng);
  const TransitionBatch batch = GatherBatch(buffer, indices, bounds);
  const Eigen::Index b = batch.obs.cols();
  const Eigen::MatrixXd noise = NormalNoise(bounds.dim(), b, rng);
  const Eigen::MatrixXd next_noise = NormalNoise(bounds.dim(), b, rng);
  const double alpha_now = alpha();
  const std::int64_t step = actor_opt_.step;

  // temperature objective on the current policy
  const SquashedBatch current =
      SquashedGaussianForward(Forward(policy_.actor, batch.obs), bounds, noise);
  const double entropy_gap = (current.log_prob.array() + target_entropy_).mean();
  stats.alpha_loss = -log_alpha_ * entropy_gap;
  RequireFinite(stats.alpha_loss, "alpha loss", step);

  const Eigen::MatrixXd targets =
      CriticTargets(policy_.actor, {&targets_[0], &targets_[1]}, bounds, batch, next_noise,
                    alpha_now, config_.gamma);
  const Eigen::MatrixXd input = CriticInput(batch.obs, batch.action);
  const AdamConfig critic_adam{config_.lr_critic};
  double critic_loss = 0.0;
  for (int k = 0; k < 2; ++k) {
    MlpGrads grads;
    const double loss = CriticLoss(critics_[k], input, targets, taus_, config_.kappa, &grads);
    RequireFinite(loss, "critic loss", step);
    AdamStep(critics_[k], grads, critic_opt_[k], critic_adam);
    critic_loss += 0.5 * loss;
  }
  stats.critic_loss = critic_loss;

  MlpGrads actor_grads;
  stats.actor_loss = ActorLoss(policy_.actor, {&critics_[0], &critics_[1]}, bounds,
                               batch.obs, noise, alpha_now, &actor_grads);
  RequireFinite(stats.actor_loss, "actor loss", step);
  AdamStep(policy_.actor, actor_grads, actor_opt_, AdamConfig{config_.lr_actor});
  AdamStep(log_alpha_, -entropy_gap, alpha_opt_, AdamConfig{config_.lr_alpha});

  SoftUpdateTargets(config_.tau_soft);
  if (!policy_.actor.AllFinite() || !critics_[0].AllFinite() || !critics_[1].AllFinite() ||
      !std::isfinite(log_alpha_)) {
    throw TrainingFault("non-finite parameters after update " + std::to_string(step));
  }
  stats.alpha = alpha();
  return stats;
}

void SacAgent::SoftUpdateTargets(double tau) {
  for (int k = 0; k < 2; ++k) SoftUpdate(targets_[k], critics_[k], tau);
}

Checkpoint SacAgent::ToCheckpoint(std::uint64_t rounds, const std::string& config_echo) const {
  Checkpoint ckpt;
  ckpt.kind = "sac";
  ckpt.config_echo = config_echo;
  ckpt.rounds = rounds;
  ckpt.window_w = policy_.window_w;
  ckpt.scaler = policy_.scaler;
  ckpt.bounds = policy_.bounds;
  ckpt.log_alpha = log_alpha_;
  ckpt.alpha_optimizer = alpha_opt_;
  ckpt.networks.push_back({"actor", policy_.actor, true, actor_opt_});
  ckpt.networks.push_back({"critic_0", critics_[0], true, critic_opt_[0]});
  ckpt.networks.push_back({"critic_1", critics_[1], true, critic_opt_[1]});
  ckpt.networks.push_back({"target_critic_0", targets_[0], false, {}});
  ckpt.networks.push_back({"target_critic_1", targets_[1], false, {}});
  return ckpt;
}

SacAgent SacAgent::FromCheckpoint(const Checkpoint& ckpt, SacConfig config) {
  if (ckpt.kind != "sac") throw DataError("checkpoint kind '" + ckpt.kind + "' is not sac");
  SacAgent agent;
  agent.config_ = std::move(config);
  agent.policy_ = PolicyFromCheckpoint(ckpt);
  const NetworkSection& actor = ckpt.Network("actor");
  agent.actor_opt_ = actor.has_optimizer ? actor.optimizer : AdamState::For(actor.params);
  for (int k = 0; k < 2; ++k) {
    const NetworkSection& c = ckpt.Network("critic_" + std::to_string(k));
    agent.critics_[k] = c.params;
    agent.critic_opt_[k] = c.has_optimizer ? c.optimizer : AdamState::For(c.params);
    agent.targets_[k] = ckpt.Network("target_critic_" + std::to_string(k)).params;
  }
  agent.config_.n_quantiles = agent.critics_[0].shape.output;
  agent.config_.hidden = agent.policy_.actor.shape.hidden;
  agent.config_.Validate();
  agent.log_alpha_ = ckpt.log_alpha;
  agent.alpha_opt_ = ckpt.alpha_optimizer;
  agent.target_entropy_ =
      agent.config_.target_entropy.value_or(-static_cast<double>(ckpt.bounds.dim()));
  agent.taus_ = QuantileFractions(agent.config_.n_quantiles);
  return agent;
}

Eigen::VectorXd SacAgent::FlattenAll() const {
  std::vector<Eigen::VectorXd> parts = {policy_.actor.Flatten()};
  for (int k = 0; k < 2; ++k) {
    parts.push_back(critics_[k].Flatten());
    parts.push_back(targets_[k].Flatten());
  }
  Eigen::Index n = 1;
  for (const auto& p : parts) n += p.size();
  Eigen::VectorXd out(n);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.segment(at, p.size()) = p;
    at += p.size();
  }
  out[at] = log_alpha_;
  return out;
}

}  // namespace fwdlearn
