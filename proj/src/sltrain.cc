#include "fwdlearn/sltrain.h"

#include <algorithm>
#include <cmath>

#include "fwdlearn/observation.h"
#include "fwdlearn/status.h"

namespace fwdlearn {

void SlConfig::Validate() const {
  if (batch_size < 1) throw ConfigError("sl batch_size must be >= 1");
  if (minibatches_per_round < 1) throw ConfigError("minibatches_per_round must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("sl lr must be >= 0");
  if (window_w < 1) throw ConfigError("window_w must be >= 1");
}

SlExample MakeSlExample(const SystemSpec& system, const Episode& episode, int t,
                        int window_w) {
  if (t < 0 || t >= episode.length()) {
    throw DataError("example index " + std::to_string(t) + " outside episode of length " +
                    std::to_string(episode.length()));
  }
  return {StackWindow(episode, t, window_w),
          PositionDelta(system, episode.state(t), episode.state(t + 1))};
}

SlPool BuildSlPool(const Dataset& dataset, const Policy& policy) {
  int total = 0;
  for (const auto& e : dataset.episodes) total += e.length();
  if (total == 0) throw EmptyDatasetError("no transitions to train on");
  SlPool pool;
  pool.inputs.resize(policy.actor.shape.input, total);
  pool.targets.resize(policy.bounds.dim(), total);
  int col = 0;
  for (const auto& e : dataset.episodes) {
    for (int t = 0; t < e.length(); ++t, ++col) {
      const SlExample ex = MakeSlExample(dataset.system, e, t, policy.window_w);
      pool.inputs.col(col) = EncodeObservation(ex.input, policy.scaler);
      pool.targets.col(col) = policy.bounds.Normalize(ex.target);
    }
  }
  return pool;
}

SlPool SubsamplePool(const SlPool& pool, int max_examples, Rng& rng) {
  if (pool.size() <= max_examples) return pool;
  std::vector<int> order(pool.size());
  for (int i = 0; i < pool.size(); ++i) order[i] = i;
  // partial Fisher-Yates
  for (int i = 0; i < max_examples; ++i) {
    std::swap(order[i], order[UniformInt(rng, i, pool.size() - 1)]);
  }
  order.resize(max_examples);
  std::sort(order.begin(), order.end());
  SlPool out;
  out.inputs.resize(pool.inputs.rows(), max_examples);
  out.targets.resize(pool.targets.rows(), max_examples);
  for (int i = 0; i < max_examples; ++i) {
    out.inputs.col(i) = pool.inputs.col(order[i]);
    out.targets.col(i) = pool.targets.col(order[i]);
  }
  return out;
}

double SlLoss(const MlpParams& actor, const Eigen::MatrixXd& inputs,
              const Eigen::MatrixXd& targets, MlpGrads* grads) {
  MlpTape tape;
  const Eigen::MatrixXd raw = Forward(actor, inputs, grads ? &tape : nullptr);
  const Eigen::Index a = targets.rows();
  if (raw.rows() != 2 * a || raw.cols() != targets.cols()) {
    throw DataError("supervised target shape does not match the actor output");
  }
  const Eigen::ArrayXXd t = raw.topRows(a).array().tanh();
  const Eigen::ArrayXXd diff = t - targets.array();
  const double n = static_cast<double>(diff.size());
  const double loss = diff.square().sum() / n;
  if (grads) {
    Eigen::MatrixXd d_raw = Eigen::MatrixXd::Zero(raw.rows(), raw.cols());
    d_raw.topRows(a) = (2.0 / n * diff * (1.0 - t.square())).matrix();
    *grads = Backward(actor, tape, d_raw);
  }
  return loss;
}

double SlRound(Policy& policy, AdamState& optimizer, const SlPool& pool,
               const SlConfig& config, Rng& rng) {
  config.Validate();
  if (pool.size() == 0) throw EmptyDatasetError("empty supervised pool");
  const AdamConfig adam{config.lr};
  Eigen::MatrixXd inputs(pool.inputs.rows(), config.batch_size);
  Eigen::MatrixXd targets(pool.targets.rows(), config.batch_size);
  double sum = 0.0;
  for (int m = 0; m < config.minibatches_per_round; ++m) {
    for (int j = 0; j < config.batch_size; ++j) {
      const int pick = UniformInt(rng, 0, pool.size() - 1);
      inputs.col(j) = pool.inputs.col(pick);
      targets.col(j) = pool.targets.col(pick);
    }
    MlpGrads grads;
    const double loss = SlLoss(policy.actor, inputs, targets, &grads);
    if (!std::isfinite(loss)) {
      throw TrainingFault("non-finite supervised loss at minibatch " + std::to_string(m) +
                          " (step " + std::to_string(optimizer.step) + ")");
    }
    AdamStep(policy.actor, grads, optimizer, adam);
    sum += loss;
  }
  return sum / config.minibatches_per_round;
}

double SlEvaluate(const Policy& policy, const SlPool& pool) {
  if (pool.size() == 0) throw EmptyDatasetError("empty evaluation pool");
  return SlLoss(policy.actor, pool.inputs, pool.targets);
}

Checkpoint SlCheckpoint(const Policy& policy, const AdamState& optimizer,
                        std::uint64_t rounds, const std::string& config_echo) {
  Checkpoint ckpt;
  ckpt.kind = "sl";
  ckpt.config_echo = config_echo;
  ckpt.rounds = rounds;
  ckpt.window_w = policy.window_w;
  ckpt.scaler = policy.scaler;
  ckpt.bounds = policy.bounds;
  ckpt.networks.push_back({"actor", policy.actor, true, optimizer});
  return ckpt;
}

}  // namespace fwdlearn
