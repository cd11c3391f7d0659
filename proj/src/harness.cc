#include "fwdlearn/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "fwdlearn/checkpoint.h"
#include "fwdlearn/dataset_io.h"
#include "fwdlearn/observation.h"
#include "fwdlearn/sac.h"
#include "fwdlearn/similarity.h"
#include "fwdlearn/sltrain.h"
#include "fwdlearn/status.h"

namespace fwdlearn {
namespace fs = std::filesystem;

namespace {

// per-round RNG streams sit above the setup streams
constexpr std::uint64_t kRoundStreamBase = 1000;
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kPoolStream = 1;
constexpr std::uint64_t kEvalStream = 2;

double ElapsedMs(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string Path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void PrepareOutput(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("cannot create output directory '" + dir + "'");
  }
}

void CheckSystem(const RunConfig& config, const Dataset& dataset) {
  if (dataset.system.name != config.system) {
    throw ConfigError("config system '" + config.system + "' does not match dataset system '" +
                      dataset.system.name + "'");
  }
}

void WriteManifest(const std::string& path, const std::string& kind,
                   const std::string& echo, const DatasetSplit& split,
                   const std::vector<std::string>& extra) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "kind = " << kind << "\n";
  out << "train_episodes = " << split.train->episodes.size() << "\n";
  out << "held_out_episodes = " << split.held_out->episodes.size() << "\n";
  out << "dataset_provenance = ";
  const auto sources = split.train->Provenance();
  for (std::size_t i = 0; i < sources.size(); ++i) out << (i ? "," : "") << sources[i];
  out << "\n";
  for (const auto& line : extra) out << line << "\n";
  out << "# config\n" << echo;
}

struct RowEval {
  std::optional<double> rmse;
  std::optional<double> reward;
};

RowEval EvalForMetrics(const Policy& policy, const DatasetSplit& split,
                       const RunConfig& config) {
  const RolloutTable table =
      EvalRollouts(policy, split.held_out, {config.env.rollout_h}, config.eval_episodes,
                   config.seed, config.env);
  return {table.rows.front().mean_rmse, table.rows.front().mean_reward};
}

}  // namespace

CollectResult Collect(FwdEnv& env, DeltaPolicy& policy, const Scaler& scaler,
                      bool explore, int max_steps, Rng& rng) {
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  CollectResult result;
  StackedObservation obs = env.Reset(rng);
  Eigen::VectorXd encoded = EncodeObservation(obs, scaler);
  for (int step = 0; step < max_steps && !env.done(); ++step) {
    const Eigen::VectorXd delta = policy.Act(env, obs, explore, rng);
    StepResult r = env.Step(delta);
    Eigen::VectorXd next_encoded = EncodeObservation(r.observation, scaler);
    result.transitions.push_back({encoded, delta, r.reward, next_encoded, r.terminal});
    result.rewards.push_back(r.reward);
    result.total_reward += r.reward;
    if (r.rollout_terminal) ++result.rollouts;
    obs = std::move(r.observation);
    encoded = std::move(next_encoded);
  }
  result.terminal = env.done();
  return result;
}

RolloutRun RunRollout(FwdEnv& env, DeltaPolicy& policy, int episode_index,
                      int start_index, int max_steps) {
  Rng unused = MakeRng(0, 0);
  StackedObservation obs = env.ResetTo(episode_index, start_index);
  RolloutRun run;
  run.episode_index = episode_index;
  run.start_index = start_index;
  for (int step = 0; step < max_steps && !env.done(); ++step) {
    StepResult r = env.Step(policy.Act(env, obs, false, unused));
    run.rewards.push_back(r.reward);
    obs = std::move(r.observation);
  }
  const RolloutState& state = env.state();
  run.truth = ToTrajectory(state.true_traj);
  run.predicted = ToTrajectory(state.predicted_traj);
  run.rollout_ends = state.rollout_ends;
  run.rmse = run.truth.rows() > 0 ? RmseRolloutMetric(run.truth, run.predicted) : 0.0;
  if (!run.rollout_ends.empty()) {
    double sum = 0.0;
    double segment = 0.0;
    std::size_t next_end = 0;
    for (std::size_t i = 0; i < run.rewards.size() && next_end < run.rollout_ends.size();
         ++i) {
      segment += run.rewards[i];
      if (static_cast<int>(i) == run.rollout_ends[next_end]) {
        sum += segment;
        segment = 0.0;
        ++next_end;
      }
    }
    run.mean_rollout_reward = sum / static_cast<double>(run.rollout_ends.size());
  }
  return run;
}

DatasetSplit SplitDataset(const Dataset& dataset, double holdout_fraction) {
  if (dataset.episodes.empty()) throw EmptyDatasetError("dataset is empty");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction must be in [0, 1)");
  }
  const int n = static_cast<int>(dataset.episodes.size());
  int n_hold = 0;
  if (n >= 2 && holdout_fraction > 0.0) {
    n_hold = std::max(1, static_cast<int>(std::lround(n * holdout_fraction)));
    n_hold = std::min(n_hold, n - 1);
  }
  if (n_hold == 0) {
    auto all = std::make_shared<const Dataset>(dataset);
    return {all, all};
  }
  auto train = std::make_shared<Dataset>();
  auto held = std::make_shared<Dataset>();
  train->system = held->system = dataset.system;
  train->episodes.assign(dataset.episodes.begin(), dataset.episodes.end() - n_hold);
  held->episodes.assign(dataset.episodes.end() - n_hold, dataset.episodes.end());
  return {train, held};
}

RolloutTable EvalRollouts(const Policy& policy, std::shared_ptr<const Dataset> dataset,
                          const std::vector<int>& lengths, int n_episodes,
                          std::uint64_t seed, FwdEnvConfig env_config) {
  LearnedPolicy learned(policy);
  return EvalRollouts(learned, std::move(dataset), lengths, n_episodes, seed, env_config);
}

RolloutTable EvalRollouts(DeltaPolicy& policy, std::shared_ptr<const Dataset> dataset,
                          const std::vector<int>& lengths, int n_episodes,
                          std::uint64_t seed, FwdEnvConfig env_config) {
  if (!dataset) throw ContractViolation("null dataset");
  if (n_episodes < 1) throw ConfigError("n_episodes must be >= 1");
  // one seeded episode order shared by every h
  std::vector<int> order(dataset->episodes.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = MakeRng(seed, kEvalStream);
  std::shuffle(order.begin(), order.end(), rng);

  RolloutTable table;
  for (int h : lengths) {
    if (h < 1) throw ConfigError("rollout lengths must be >= 1");
    RolloutRow row;
    row.h = h;
    std::vector<int> picked;
    for (int ep : order) {
      if (static_cast<int>(picked.size()) == n_episodes) break;
      if (dataset->episodes[ep].length() > h) picked.push_back(ep);
    }
    std::vector<RolloutRun> runs;
    if (!picked.empty()) {
      FwdEnvConfig cfg = env_config;
      cfg.rollout_h = h;
      cfg.start_offset_max = 0;
      FwdEnv env(dataset, cfg);
      for (int ep : picked) {
        runs.push_back(RunRollout(env, policy, ep, 0, dataset->episodes[ep].length()));
      }
      double mean = 0.0;
      for (const auto& r : runs) mean += r.rmse;
      mean /= static_cast<double>(runs.size());
      double var = 0.0;
      for (const auto& r : runs) var += (r.rmse - mean) * (r.rmse - mean);
      var /= static_cast<double>(runs.size());
      double reward = 0.0;
      int rewarded = 0;
      for (const auto& r : runs) {
        if (r.mean_rollout_reward) {
          reward += *r.mean_rollout_reward;
          ++rewarded;
        }
      }
      row.n_episodes = static_cast<int>(runs.size());
      row.mean_rmse = mean;
      row.std_rmse = std::sqrt(var);
      if (rewarded > 0) row.mean_reward = reward / rewarded;
    }
    table.rows.push_back(row);
    table.runs.push_back(std::move(runs));
  }
  return table;
}

void WriteRolloutTable(const std::string& path, const RolloutTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "h,n_episodes,mean_rmse,std_rmse,mean_reward\n";
  for (const auto& row : table.rows) {
    out << row.h << ',' << row.n_episodes << ',' << FormatOptional(row.mean_rmse) << ','
        << FormatOptional(row.std_rmse) << ',' << FormatOptional(row.mean_reward) << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::vector<RolloutRow> ReadRolloutTable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rollout table '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("h,n_episodes,mean_rmse", 0) != 0) {
    throw DataError(path + ": unexpected rollout table header");
  }
  std::vector<RolloutRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + " row " + std::to_string(line_no);
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                    : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 5) throw DataError(where + ": expected 5 columns");
    RolloutRow row;
    const auto h = ParseOptional(cells[0], where);
    const auto n = ParseOptional(cells[1], where);
    if (!h || !n) throw DataError(where + ": missing h or n_episodes");
    row.h = static_cast<int>(*h);
    row.n_episodes = static_cast<int>(*n);
    row.mean_rmse = ParseOptional(cells[2], where);
    row.std_rmse = ParseOptional(cells[3], where);
    row.mean_reward = ParseOptional(cells[4], where);
    rows.push_back(row);
  }
  return rows;
}

std::string CheckpointName(int round) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_%06d.fwdc", round);
  return buf;
}

std::shared_ptr<const Dataset> LoadRunDataset(const RunConfig& config) {
  if (config.dataset.empty()) throw ConfigError("'dataset' is required");
  if (!fs::exists(config.dataset)) {
    throw ConfigError("dataset '" + config.dataset + "' does not exist");
  }
  return std::make_shared<const Dataset>(LoadDataset(config.dataset));
}

TrainSummary TrainRl(const RunConfig& run_config, std::shared_ptr<const Dataset> dataset) {
  RunConfig config = run_config;
  config.Finalize();
  if (!dataset) throw ContractViolation("null dataset");
  CheckSystem(config, *dataset);
  PrepareOutput(config.out_dir);

  const DatasetSplit split = SplitDataset(*dataset, config.holdout_fraction);
  const Scaler scaler = MinMaxStats(*split.train);
  const ActionBounds bounds = DeltaBounds(*split.train);
  Rng init = MakeRng(config.seed, kInitStream);
  SacAgent agent(scaler, bounds, config.env.window_w, config.sac, init);
  FwdEnv env(split.train, config.env);
  ReplayBuffer buffer(config.sac.buffer_capacity);
  Rng pool_rng = MakeRng(config.seed, kPoolStream);
  const SlPool mse_pool =
      SubsamplePool(BuildSlPool(*split.held_out, agent.policy()), config.mse_examples, pool_rng);

  const std::string echo = EchoConfig(config, {"out"});
  TrainSummary summary;
  summary.metrics_path = Path(config.out_dir, "metrics.csv");
  MetricsWriter metrics(summary.metrics_path);
  const std::string manifest = Path(config.out_dir, "manifest.txt");
  WriteManifest(manifest, "sac", echo, split, {});

  for (int ep = 1; ep <= config.episodes; ++ep) {
    const auto started = std::chrono::steady_clock::now();
    Rng rng = MakeRng(config.seed, kRoundStreamBase + static_cast<std::uint64_t>(ep));
    SacPolicy acting(agent);
    const CollectResult collected =
        Collect(env, acting, scaler, true, config.max_steps, rng);
    for (const auto& t : collected.transitions) buffer.Push(t);

    double critic_sum = 0.0;
    double actor_sum = 0.0;
    int applied = 0;
    for (int i = 0; i < config.sac.updates_per_episode; ++i) {
      const UpdateStats stats = agent.Update(buffer, rng);
      if (stats.skipped) {
        ++summary.skipped_updates;
        continue;
      }
      critic_sum += stats.critic_loss;
      actor_sum += stats.actor_loss;
      ++applied;
    }
    summary.total_updates += applied;

    MetricsRecord rec;
    rec.round = ep;
    if (applied > 0) {
      rec.critic_loss = critic_sum / applied;
      rec.actor_loss = actor_sum / applied;
    }
    rec.alpha = agent.alpha();
    rec.total_env_reward = collected.total_reward;
    rec.supervised_mse = SlEvaluate(agent.policy(), mse_pool);
    if (ep % config.eval_every == 0 || ep == config.episodes) {
      const RowEval eval = EvalForMetrics(agent.policy(), split, config);
      rec.rmse_rollout = eval.rmse;
      rec.mean_rollout_reward = eval.reward;
    }
    if (config.wall_clock) rec.wall_ms = ElapsedMs(started);
    metrics.Append(rec);
    summary.records.push_back(rec);

    if (ep % config.checkpoint_every == 0) {
      const std::string path = Path(config.out_dir, CheckpointName(ep));
      SaveCheckpoint(path, agent.ToCheckpoint(ep, echo));
      summary.checkpoints.push_back(path);
    }
    summary.rounds = ep;
  }
  summary.final_checkpoint = Path(config.out_dir, "final.fwdc");
  SaveCheckpoint(summary.final_checkpoint, agent.ToCheckpoint(summary.rounds, echo));
  WriteManifest(manifest, "sac", echo, split,
                {"total_updates = " + std::to_string(summary.total_updates),
                 "skipped_updates = " + std::to_string(summary.skipped_updates),
                 "collect_horizon = " + std::to_string(config.max_steps)});
  return summary;
}

TrainSummary TrainSl(const RunConfig& run_config, std::shared_ptr<const Dataset> dataset) {
  RunConfig config = run_config;
  config.Finalize();
  if (!dataset) throw ContractViolation("null dataset");
  CheckSystem(config, *dataset);
  PrepareOutput(config.out_dir);

  const DatasetSplit split = SplitDataset(*dataset, config.holdout_fraction);
  const Scaler scaler = MinMaxStats(*split.train);
  const ActionBounds bounds = DeltaBounds(*split.train);
  Rng init = MakeRng(config.seed, kInitStream);
  Policy policy = Policy::Create(scaler, bounds, config.env.window_w, config.hidden, init);
  AdamState optimizer = AdamState::For(policy.actor);
  const SlPool train_pool = BuildSlPool(*split.train, policy);
  Rng pool_rng = MakeRng(config.seed, kPoolStream);
  const SlPool mse_pool =
      SubsamplePool(BuildSlPool(*split.held_out, policy), config.mse_examples, pool_rng);

  const std::string echo = EchoConfig(config, {"out"});
  TrainSummary summary;
  summary.metrics_path = Path(config.out_dir, "metrics.csv");
  MetricsWriter metrics(summary.metrics_path);
  const std::string manifest = Path(config.out_dir, "manifest.txt");
  WriteManifest(manifest, "sl", echo, split, {"sl_targets = normalized_delta"});

  for (int round = 1; round <= config.episodes; ++round) {
    const auto started = std::chrono::steady_clock::now();
    Rng rng = MakeRng(config.seed, kRoundStreamBase + static_cast<std::uint64_t>(round));
    const double train_mse = SlRound(policy, optimizer, train_pool, config.sl, rng);
    summary.total_updates += config.sl.minibatches_per_round;

    MetricsRecord rec;
    rec.round = round;
    rec.actor_loss = train_mse;
    rec.supervised_mse = SlEvaluate(policy, mse_pool);
    if (round % config.eval_every == 0 || round == config.episodes) {
      const RowEval eval = EvalForMetrics(policy, split, config);
      rec.rmse_rollout = eval.rmse;
      rec.mean_rollout_reward = eval.reward;
    }
    if (config.wall_clock) rec.wall_ms = ElapsedMs(started);
    metrics.Append(rec);
    summary.records.push_back(rec);

    if (round % config.checkpoint_every == 0) {
      const std::string path = Path(config.out_dir, CheckpointName(round));
      SaveCheckpoint(path, SlCheckpoint(policy, optimizer, round, echo));
      summary.checkpoints.push_back(path);
    }
    summary.rounds = round;
  }
  summary.final_checkpoint = Path(config.out_dir, "final.fwdc");
  SaveCheckpoint(summary.final_checkpoint,
                 SlCheckpoint(policy, optimizer, summary.rounds, echo));
  WriteManifest(manifest, "sl", echo, split,
                {"sl_targets = normalized_delta",
                 "total_updates = " + std::to_string(summary.total_updates)});
  return summary;
}

}  // namespace fwdlearn
