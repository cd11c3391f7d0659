#ifndef FWDLEARN_HARNESS_H_
#define FWDLEARN_HARNESS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fwdlearn/config.h"
#include "fwdlearn/dynsys.h"
#include "fwdlearn/fwdenv.h"
#include "fwdlearn/metrics.h"
#include "fwdlearn/policy.h"
#include "fwdlearn/replay_buffer.h"

namespace fwdlearn {

struct CollectResult {
  std::vector<ReplayTransition> transitions;
  std::vector<double> rewards;
  double total_reward = 0.0;
  int rollouts = 0;  // completed re-grounding segments
  bool terminal = false;
};

// Resets the environment and steps it with the policy until the episode
// ends or max_steps transitions were taken. Observations in the returned
// transitions are encoded with the scaler.
CollectResult Collect(FwdEnv& env, DeltaPolicy& policy, const Scaler& scaler,
                      bool explore, int max_steps, Rng& rng);

// Bootstrapped prediction of one episode with deterministic actions,
// re-grounded every env.config().rollout_h steps.
struct RolloutRun {
  int episode_index = 0;
  int start_index = 0;
  Trajectory truth;
  Trajectory predicted;
  std::vector<int> rollout_ends;  // row index of the last step of each segment
  std::vector<double> rewards;
  double rmse = 0.0;
  // mean over completed segments of the summed segment reward
  std::optional<double> mean_rollout_reward;
};

RolloutRun RunRollout(FwdEnv& env, DeltaPolicy& policy, int episode_index,
                      int start_index, int max_steps);

// Train/held-out split: the last holdout_fraction of episodes (at least one
// when there are two or more) is held out.
struct DatasetSplit {
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> held_out;
};
DatasetSplit SplitDataset(const Dataset& dataset, double holdout_fraction);

struct RolloutRow {
  int h = 0;
  int n_episodes = 0;
  std::optional<double> mean_rmse;
  std::optional<double> std_rmse;
  std::optional<double> mean_reward;
};

struct RolloutTable {
  std::vector<RolloutRow> rows;
  // per h, the runs behind each row (same order as rows)
  std::vector<std::vector<RolloutRun>> runs;
};

// Episodes are visited in one seeded order; for every h the first
// n_episodes of them longer than h are predicted over all their steps from
// step 0. h values without such an episode have empty rows.
RolloutTable EvalRollouts(const Policy& policy, std::shared_ptr<const Dataset> dataset,
                          const std::vector<int>& lengths, int n_episodes,
                          std::uint64_t seed, FwdEnvConfig env_config);
// same protocol for any delta policy, driven deterministically
RolloutTable EvalRollouts(DeltaPolicy& policy, std::shared_ptr<const Dataset> dataset,
                          const std::vector<int>& lengths, int n_episodes,
                          std::uint64_t seed, FwdEnvConfig env_config);

void WriteRolloutTable(const std::string& path, const RolloutTable& table);
std::vector<RolloutRow> ReadRolloutTable(const std::string& path);

struct TrainSummary {
  int rounds = 0;
  std::int64_t total_updates = 0;
  std::int64_t skipped_updates = 0;
  std::string metrics_path;
  std::string final_checkpoint;
  std::vector<std::string> checkpoints;
  std::vector<MetricsRecord> records;
};

// The episode loop: collect with exploration, push, update, log, checkpoint.
// Writes metrics.csv, ckpt_NNNNNN.fwdc, final.fwdc and manifest.txt into
// config.out_dir.
TrainSummary TrainRl(const RunConfig& config, std::shared_ptr<const Dataset> dataset);
// Same loop shape with one supervised round per row.
TrainSummary TrainSl(const RunConfig& config, std::shared_ptr<const Dataset> dataset);

// loads config.dataset
std::shared_ptr<const Dataset> LoadRunDataset(const RunConfig& config);

std::string CheckpointName(int round);

}  // namespace fwdlearn

#endif  // FWDLEARN_HARNESS_H_
