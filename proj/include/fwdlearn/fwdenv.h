#ifndef FWDLEARN_FWDENV_H_
#define FWDLEARN_FWDENV_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fwdlearn/dynsys.h"
#include "fwdlearn/observation.h"
#include "fwdlearn/rng.h"
#include "fwdlearn/similarity.h"
#include "fwdlearn/squashed_gaussian.h"

namespace fwdlearn {

enum class RewardMode { kPseudoSparse, kFullySparse };

RewardMode ParseRewardMode(std::string_view name);
std::string ToString(RewardMode mode);

struct FwdEnvConfig {
  int window_w = 20;
  int rollout_h = 50;
  int start_offset_max = 30;
  RewardMode reward_mode = RewardMode::kPseudoSparse;
  // 0 uses the dataset's dt
  double dt = 0.0;
  SimilarityKind similarity = SimilarityKind::kZe;

  void Validate() const;
};

// qpos_{t+1} = qpos_t + delta, qvel_{t+1} = delta / dt
std::pair<Eigen::VectorXd, Eigen::VectorXd> IntegrateDelta(const Eigen::VectorXd& qpos,
                                                           const Eigen::VectorXd& delta,
                                                           double dt);

// +-scale * (max |one-step position change| per dimension)
ActionBounds DeltaBounds(const Dataset& dataset, double scale = 1.5);

// Reward of one environment step. At a rollout end the similarity of the
// whole segment is scored (1 - Z_E for kZe, the score itself for
// kSimplified); otherwise pseudo-sparse gives -||s_t - s^_t|| on the newest
// rows and fully-sparse gives 0.
double RewardFn(const Trajectory& predicted_segment, const Trajectory& true_segment,
                bool rollout_terminal, const FwdEnvConfig& config);

// counters and buffers of one episode
struct RolloutState {
  int episode_index = -1;
  int start_index = 0;
  int step_counter = 0;          // index into the episode of the newest frame
  int rollout_step_counter = 0;  // steps since the last re-grounding
  std::vector<Eigen::VectorXd> predicted_traj;
  std::vector<Eigen::VectorXd> true_traj;
  std::vector<Eigen::VectorXd> true_actions;
  std::vector<int> rollout_ends;  // indices into the trajectories
  int segment_begin = 0;
  StackedObservation current_obs;
  bool terminal = false;
};

struct StepResult {
  StackedObservation observation;
  double reward = 0.0;
  bool terminal = false;
  bool rollout_terminal = false;
};

// Dataset-replay environment whose actions are position deltas.
class FwdEnv {
 public:
  FwdEnv(std::shared_ptr<const Dataset> dataset, FwdEnvConfig config);

  // uniform episode among those longer than start_offset_max + rollout_h,
  // uniform start in [0, start_offset_max]
  const StackedObservation& Reset(Rng& rng);
  // explicit episode and start index (evaluation)
  const StackedObservation& ResetTo(int episode_index, int start_index);

  StepResult Step(const Eigen::VectorXd& delta);

  // position delta realized by the dataset at the current step
  Eigen::VectorXd TrueDelta() const;

  const RolloutState& state() const { return state_; }
  const FwdEnvConfig& config() const { return config_; }
  const Dataset& dataset() const { return *dataset_; }
  const Episode& episode() const;
  double dt() const { return dt_; }
  int obs_dim() const;
  int action_dim() const { return dataset_->system.pos_dim; }
  bool done() const { return state_.terminal; }

 private:
  std::shared_ptr<const Dataset> dataset_;
  FwdEnvConfig config_;
  double dt_ = 0.0;
  std::vector<int> eligible_;
  RolloutState state_;
};

// anything that maps an observation to a delta (learned or scripted)
class DeltaPolicy {
 public:
  virtual ~DeltaPolicy() = default;
  virtual Eigen::VectorXd Act(const FwdEnv& env, const StackedObservation& obs,
                              bool explore, Rng& rng) = 0;
};

// replays the dataset's true deltas
class TrueDeltaPolicy : public DeltaPolicy {
 public:
  Eigen::VectorXd Act(const FwdEnv& env, const StackedObservation&, bool,
                      Rng&) override {
    return env.TrueDelta();
  }
};

// rows of a trajectory buffer as a T x D matrix
Trajectory ToTrajectory(const std::vector<Eigen::VectorXd>& rows, int begin = 0,
                        int end = -1);

}  // namespace fwdlearn

#endif  // FWDLEARN_FWDENV_H_
