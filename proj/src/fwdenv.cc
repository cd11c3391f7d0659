#include "fwdlearn/fwdenv.h"

#include <cmath>

#include "fwdlearn/status.h"

namespace fwdlearn {

RewardMode ParseRewardMode(std::string_view name) {
  if (name == "pseudo_sparse") return RewardMode::kPseudoSparse;
  if (name == "fully_sparse") return RewardMode::kFullySparse;
  throw ConfigError("unknown reward mode '" + std::string(name) + "'");
}

std::string ToString(RewardMode mode) {
  return mode == RewardMode::kPseudoSparse ? "pseudo_sparse" : "fully_sparse";
}

void FwdEnvConfig::Validate() const {
  if (window_w < 1) throw ConfigError("window_w must be >= 1");
  if (rollout_h < 1) throw ConfigError("rollout_h must be >= 1");
  if (start_offset_max < 0) throw ConfigError("start_offset_max must be >= 0");
  if (dt < 0.0 || !std::isfinite(dt)) throw ConfigError("dt must be >= 0");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> IntegrateDelta(const Eigen::VectorXd& qpos,
                                                           const Eigen::VectorXd& delta,
                                                           double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (qpos.size() != delta.size()) throw DataError("delta width != qpos width");
  return {qpos + delta, delta / dt};
}

ActionBounds DeltaBounds(const Dataset& dataset, double scale) {
  if (dataset.episodes.empty()) throw EmptyDatasetError("dataset is empty");
  if (!(scale > 0.0)) throw ConfigError("delta bound scale must be > 0");
  const SystemSpec& spec = dataset.system;
  Eigen::VectorXd max_abs = Eigen::VectorXd::Zero(spec.pos_dim);
  for (const auto& e : dataset.episodes) {
    for (int t = 0; t < e.length(); ++t) {
      max_abs = max_abs.cwiseMax(PositionDelta(spec, e.state(t), e.state(t + 1)).cwiseAbs());
    }
  }
  // a constant dimension still needs a non-empty interval
  Eigen::VectorXd bound = (scale * max_abs).cwiseMax(1e-6);
  return {-bound, bound};
}

double RewardFn(const Trajectory& predicted_segment, const Trajectory& true_segment,
                bool rollout_terminal, const FwdEnvConfig& config) {
  if (rollout_terminal) {
    if (true_segment.rows() < 1) throw DataError("empty rollout segment");
    if (config.similarity == SimilarityKind::kZe) {
      return 1.0 - SimilarityZe(true_segment, predicted_segment);
    }
    if (true_segment.rows() < 2) {
      // a single-step rollout has no spectrum or variance; score time view only
      return 1.0 / (1.0 + RmseRolloutMetric(true_segment, predicted_segment));
    }
    return SimplifiedSimilarity(true_segment, predicted_segment);
  }
  if (config.reward_mode == RewardMode::kFullySparse) return 0.0;
  const Eigen::Index last = true_segment.rows() - 1;
  return -(true_segment.row(last) - predicted_segment.row(last)).norm();
}

Trajectory ToTrajectory(const std::vector<Eigen::VectorXd>& rows, int begin, int end) {
  if (end < 0) end = static_cast<int>(rows.size());
  if (begin >= end) return Trajectory(0, rows.empty() ? 0 : rows.front().size());
  Trajectory out(end - begin, rows[begin].size());
  for (int i = begin; i < end; ++i) out.row(i - begin) = rows[i].transpose();
  return out;
}

FwdEnv::FwdEnv(std::shared_ptr<const Dataset> dataset, FwdEnvConfig config)
    : dataset_(std::move(dataset)), config_(config) {
  if (!dataset_) throw ContractViolation("null dataset");
  config_.Validate();
  dataset_->Validate();
  if (dataset_->episodes.empty()) throw EmptyDatasetError("dataset is empty");
  dt_ = config_.dt > 0.0 ? config_.dt : dataset_->system.dt;
  for (size_t i = 0; i < dataset_->episodes.size(); ++i) {
    if (dataset_->episodes[i].length() > config_.start_offset_max + config_.rollout_h) {
      eligible_.push_back(static_cast<int>(i));
    }
  }
}

const Episode& FwdEnv::episode() const {
  if (state_.episode_index < 0) throw ContractViolation("environment was never reset");
  return dataset_->episodes[state_.episode_index];
}

int FwdEnv::obs_dim() const {
  return config_.window_w * (dataset_->system.state_dim + dataset_->system.action_dim);
}

const StackedObservation& FwdEnv::Reset(Rng& rng) {
  if (eligible_.empty()) {
    throw EmptyDatasetError("no episode longer than start_offset_max + rollout_h = " +
                            std::to_string(config_.start_offset_max + config_.rollout_h));
  }
  const int pick = UniformInt(rng, 0, static_cast<int>(eligible_.size()) - 1);
  const int start = UniformInt(rng, 0, config_.start_offset_max);
  return ResetTo(eligible_[pick], start);
}

const StackedObservation& FwdEnv::ResetTo(int episode_index, int start_index) {
  if (episode_index < 0 ||
      episode_index >= static_cast<int>(dataset_->episodes.size())) {
    throw DataError("episode index out of range");
  }
  const Episode& e = dataset_->episodes[episode_index];
  if (start_index < 0 || start_index >= e.length()) {
    throw DataError("start index out of range for episode");
  }
  state_ = RolloutState{};
  state_.episode_index = episode_index;
  state_.start_index = start_index;
  state_.step_counter = start_index;
  state_.current_obs = StackWindow(e, start_index, config_.window_w);
  return state_.current_obs;
}

Eigen::VectorXd FwdEnv::TrueDelta() const {
  if (state_.terminal) throw ContractViolation("episode already terminated");
  const Episode& e = episode();
  return PositionDelta(dataset_->system, e.state(state_.step_counter),
                       e.state(state_.step_counter + 1));
}

StepResult FwdEnv::Step(const Eigen::VectorXd& delta) {
  if (state_.terminal) throw ContractViolation("Step called after the terminal step");
  const Episode& e = episode();
  const SystemSpec& spec = dataset_->system;
  if (delta.size() != spec.pos_dim) throw DataError("delta width != pos_dim");
  if (!delta.allFinite()) throw TrainingFault("agent produced a non-finite delta");

  ++state_.step_counter;
  ++state_.rollout_step_counter;
  const Eigen::VectorXd true_state = e.state(state_.step_counter);
  const Eigen::VectorXd true_action = ActionAt(e, state_.step_counter);

  const auto [qpos, qvel] = SplitState(spec, state_.current_obs.newest().state);
  auto [next_qpos, next_qvel] = IntegrateDelta(qpos, delta, dt_);
  if (spec.wrap_positions) {
    for (Eigen::Index i = 0; i < next_qpos.size(); ++i) {
      next_qpos[i] = WrapAngle(next_qpos[i]);
    }
  }
  const Eigen::VectorXd predicted = JoinState(next_qpos, next_qvel);

  state_.predicted_traj.push_back(predicted);
  state_.true_traj.push_back(true_state);
  state_.true_actions.push_back(true_action);

  StepResult result;
  result.rollout_terminal = state_.rollout_step_counter >= config_.rollout_h;
  // away from rollout ends only the newest rows matter
  const int begin = result.rollout_terminal
                        ? state_.segment_begin
                        : static_cast<int>(state_.predicted_traj.size()) - 1;
  result.reward = RewardFn(ToTrajectory(state_.predicted_traj, begin),
                           ToTrajectory(state_.true_traj, begin),
                           result.rollout_terminal, config_);

  // re-ground only the newest slot at a rollout boundary
  state_.current_obs.Push(
      {result.rollout_terminal ? true_state : predicted, true_action});
  if (result.rollout_terminal) {
    state_.rollout_ends.push_back(static_cast<int>(state_.predicted_traj.size()) - 1);
    state_.segment_begin = static_cast<int>(state_.predicted_traj.size());
    state_.rollout_step_counter = 0;
  }
  state_.terminal = state_.step_counter >= e.length();
  result.terminal = state_.terminal;
  result.observation = state_.current_obs;
  return result;
}

}  // namespace fwdlearn
