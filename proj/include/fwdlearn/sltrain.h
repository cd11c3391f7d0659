#ifndef FWDLEARN_SLTRAIN_H_
#define FWDLEARN_SLTRAIN_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fwdlearn/adam.h"
#include "fwdlearn/checkpoint.h"
#include "fwdlearn/dynsys.h"
#include "fwdlearn/policy.h"

namespace fwdlearn {

struct SlConfig {
  int batch_size = 1024;
  int minibatches_per_round = 100;
  double lr = 3e-4;
  int window_w = 20;
  std::vector<int> hidden = {64, 64};

  void Validate() const;
};

// Stacked true frames ending at t and the position delta taken from t.
struct SlExample {
  StackedObservation input;
  Eigen::VectorXd target;
};

// throws DataError unless 0 <= t < episode.length()
SlExample MakeSlExample(const SystemSpec& system, const Episode& episode, int t,
                        int window_w);

// Every example of a dataset, encoded for the network: inputs are scaled
// stacks (I x P), targets are deltas normalized by the delta bounds (A x P).
struct SlPool {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  int size() const { return static_cast<int>(inputs.cols()); }
};

SlPool BuildSlPool(const Dataset& dataset, const Policy& policy);
// up to max_examples columns drawn without replacement, in pool order
SlPool SubsamplePool(const SlPool& pool, int max_examples, Rng& rng);

// Mean squared error between tanh(mean) and the normalized targets, over
// every element of the batch.
double SlLoss(const MlpParams& actor, const Eigen::MatrixXd& inputs,
              const Eigen::MatrixXd& targets, MlpGrads* grads = nullptr);

// minibatches_per_round steps on uniform random batches; returns the mean
// pre-step batch loss
double SlRound(Policy& policy, AdamState& optimizer, const SlPool& pool,
               const SlConfig& config, Rng& rng);

// one-step MSE of the deterministic output on a fixed pool
double SlEvaluate(const Policy& policy, const SlPool& pool);

Checkpoint SlCheckpoint(const Policy& policy, const AdamState& optimizer,
                        std::uint64_t rounds, const std::string& config_echo);

}  // namespace fwdlearn

#endif  // FWDLEARN_SLTRAIN_H_
