#ifndef FWDLEARN_POLICY_H_
#define FWDLEARN_POLICY_H_

#include <cstdint>
#include <vector>

#include "fwdlearn/fwdenv.h"
#include "fwdlearn/mlp.h"
#include "fwdlearn/observation.h"
#include "fwdlearn/squashed_gaussian.h"

namespace fwdlearn {

// The learned forward model: a squashed-Gaussian actor over scaled stacked
// observations. Shared by the RL agent and the supervised baseline.
struct Policy {
  MlpParams actor;
  Scaler scaler;
  ActionBounds bounds;
  int window_w = 0;

  // actor input w * scaler.dim(), output 2 * bounds.dim(); last layer x0.01
  static Policy Create(const Scaler& scaler, const ActionBounds& bounds, int window_w,
                       const std::vector<int>& hidden, Rng& rng);

  MlpShape shape() const { return actor.shape; }

  // explore: stochastic sample; otherwise the tanh(mean) mapping
  Eigen::VectorXd Act(const StackedObservation& obs, bool explore, Rng& rng) const;
  Eigen::VectorXd ActEncoded(const Eigen::VectorXd& encoded, bool explore, Rng& rng) const;
};

// FNV-1a of the architecture descriptor
std::uint64_t ArchitectureHash(const MlpShape& shape);

class LearnedPolicy : public DeltaPolicy {
 public:
  explicit LearnedPolicy(const Policy& policy) : policy_(policy) {}
  Eigen::VectorXd Act(const FwdEnv&, const StackedObservation& obs, bool explore,
                      Rng& rng) override {
    return policy_.Act(obs, explore, rng);
  }

 private:
  const Policy& policy_;
};

}  // namespace fwdlearn

#endif  // FWDLEARN_POLICY_H_
