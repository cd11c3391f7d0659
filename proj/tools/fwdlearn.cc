// fwdlearn: dataset generation, training, rollout evaluation and reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fwdlearn/checkpoint.h"
#include "fwdlearn/config.h"
#include "fwdlearn/dataset_io.h"
#include "fwdlearn/dynsys.h"
#include "fwdlearn/harness.h"
#include "fwdlearn/report.h"
#include "fwdlearn/status.h"

namespace fs = std::filesystem;
using namespace fwdlearn;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
};

void AddCommon(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "key = value config file");
  cmd->add_option("--seed", flags.seed, "override the config seed");
  cmd->add_option("--out", flags.out, "override the output directory");
  cmd->add_option("--set", flags.sets, "override any config key (key=value)");
}

RunConfig ResolveConfig(const CommonFlags& flags) {
  RunConfig config = flags.config_path.empty() ? RunConfig{} : LoadRunConfig(flags.config_path);
  for (const auto& kv : flags.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    SetConfigValue(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.out.empty()) config.out_dir = flags.out;
  config.Finalize();
  return config;
}

// "label=path" or a bare path labelled by its parent directory
std::pair<std::string, std::string> SplitLabel(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq != std::string::npos) return {arg.substr(0, eq), arg.substr(eq + 1)};
  const fs::path p(arg);
  std::string label = p.parent_path().filename().string();
  if (label.empty()) label = p.stem().string();
  return {label, arg};
}

struct GenFlags {
  std::string system;
  std::optional<int> episodes;
  std::optional<int> max_len;
};

// --out names the dataset file (.fwdt text or .fwdb binary)
int RunGen(CommonFlags flags, const GenFlags& gen) {
  const std::string out_file = flags.out;
  flags.out.clear();
  RunConfig config = ResolveConfig(flags);
  if (!gen.system.empty()) config.system = gen.system;
  if (gen.episodes) config.gen_episodes = *gen.episodes;
  if (gen.max_len) config.gen_max_len = *gen.max_len;
  config.Finalize();
  std::string path = !out_file.empty() ? out_file : config.dataset;
  if (path.empty()) path = "dataset.fwdb";
  const SystemSpec spec = MakeSystemSpec(config.system, config.dt);
  const Dataset dataset =
      GenerateDataset(spec, config.gen_mix, config.gen_episodes, config.gen_max_len, config.seed);
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  SaveDataset(dataset, path);
  std::printf("wrote %zu episodes of %s to %s\n", dataset.episodes.size(), spec.name.c_str(),
              path.c_str());
  return 0;
}

void PrintSummary(const TrainSummary& s) {
  std::printf("rounds %d, gradient updates %lld (skipped %lld)\n", s.rounds,
              static_cast<long long>(s.total_updates),
              static_cast<long long>(s.skipped_updates));
  if (!s.records.empty()) std::printf("last row: %s\n", FormatMetricsRow(s.records.back()).c_str());
  std::printf("metrics %s\nfinal checkpoint %s\n", s.metrics_path.c_str(),
              s.final_checkpoint.c_str());
}

int RunTrain(const CommonFlags& flags, bool rl) {
  const RunConfig config = ResolveConfig(flags);
  const auto dataset = LoadRunDataset(config);
  PrintSummary(rl ? TrainRl(config, dataset) : TrainSl(config, dataset));
  return 0;
}

int RunEval(const CommonFlags& flags, const std::string& checkpoint_flag) {
  RunConfig config = ResolveConfig(flags);
  if (!checkpoint_flag.empty()) config.checkpoint = checkpoint_flag;
  if (config.checkpoint.empty()) throw ConfigError("'eval.checkpoint' is required");
  if (!fs::exists(config.checkpoint)) {
    throw ConfigError("checkpoint '" + config.checkpoint + "' does not exist");
  }
  const Checkpoint ckpt = LoadCheckpoint(config.checkpoint);
  const Policy policy = PolicyFromCheckpoint(ckpt);
  const auto dataset = LoadRunDataset(config);
  if (dataset->system.state_dim + dataset->system.action_dim != policy.scaler.dim() ||
      dataset->system.pos_dim != policy.bounds.dim()) {
    throw DataError("checkpoint does not fit the dataset's system");
  }
  config.env.window_w = ckpt.window_w;
  const RolloutTable table = EvalRollouts(policy, dataset, config.eval_lengths,
                                          config.eval_episodes, config.seed, config.env);
  fs::create_directories(config.out_dir);
  const std::string csv = (fs::path(config.out_dir) / "rollouts.csv").string();
  WriteRolloutTable(csv, table);
  const std::string label = config.label.empty() ? ckpt.kind : config.label;
  PlotSpec plot{"RMSE by rollout length", "h", "rmse_rollout", {}, {}};
  PlotSeries series;
  series.name = label;
  for (const auto& row : table.rows) {
    if (!row.mean_rmse) continue;
    series.x.push_back(row.h);
    series.y.push_back(*row.mean_rmse);
  }
  plot.series.push_back(series);
  std::ofstream(fs::path(config.out_dir) / "rollout_rmse.svg") << RenderLinePlot(plot);

  std::vector<std::string> names;
  for (int i = 0; i < dataset->system.state_dim; ++i) {
    const bool pos = i < dataset->system.pos_dim;
    names.push_back((pos ? "qpos[" : "qvel[") +
                    std::to_string(pos ? i : i - dataset->system.pos_dim) + "]");
  }
  // overlays at the first length
  if (!table.rows.empty()) {
    const auto& runs = table.runs.front();
    for (int i = 0; i < config.overlay_episodes && i < static_cast<int>(runs.size()); ++i) {
      const RolloutRun& run = runs[i];
      char name[64];
      std::snprintf(name, sizeof(name), "overlay_h%d_ep%d.svg", table.rows.front().h,
                    run.episode_index);
      std::ofstream(fs::path(config.out_dir) / name)
          << RenderOverlay(run, names,
                           "episode " + std::to_string(run.episode_index) + ", h=" +
                               std::to_string(table.rows.front().h));
    }
  }
  for (const auto& row : table.rows) {
    std::printf("h=%-5d n=%d rmse=%s reward=%s\n", row.h, row.n_episodes,
                FormatOptional(row.mean_rmse).c_str(), FormatOptional(row.mean_reward).c_str());
  }
  return 0;
}

int RunReport(const std::vector<std::string>& metrics_args,
              const std::vector<std::string>& rollout_args, const std::string& out) {
  std::vector<LabeledMetrics> metrics;
  for (const auto& arg : metrics_args) {
    auto [label, path] = SplitLabel(arg);
    metrics.push_back({label, ReadMetricsCsv(path)});
  }
  std::vector<LabeledRollouts> rollouts;
  for (const auto& arg : rollout_args) {
    auto [label, path] = SplitLabel(arg);
    rollouts.push_back({label, ReadRolloutTable(path)});
  }
  for (const auto& path : RenderReport(metrics, rollouts, out.empty() ? "report" : out)) {
    std::printf("%s\n", path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward-model learning by reinforcement learning"};
  app.require_subcommand(1);

  CommonFlags gen_flags, rl_flags, sl_flags, eval_flags;
  auto* gen = app.add_subcommand("gen", "generate a dataset from a built-in system");
  AddCommon(gen, gen_flags);
  GenFlags gen_extra;
  gen->add_option("--system", gen_extra.system, "pendulum or msd");
  gen->add_option("--episodes", gen_extra.episodes, "number of episodes");
  gen->add_option("--max-len", gen_extra.max_len, "transitions per episode");
  auto* train_rl = app.add_subcommand("train-rl", "train the forward model with SAC");
  AddCommon(train_rl, rl_flags);
  auto* train_sl = app.add_subcommand("train-sl", "train the supervised baseline");
  AddCommon(train_sl, sl_flags);
  auto* eval = app.add_subcommand("eval-rollout", "bootstrapped rollouts at several lengths");
  AddCommon(eval, eval_flags);
  std::string checkpoint;
  eval->add_option("--checkpoint", checkpoint, "model file (overrides eval.checkpoint)");

  auto* report = app.add_subcommand("report", "plots and summary from metrics CSVs");
  std::vector<std::string> metrics_args, rollout_args;
  std::string report_out;
  report->add_option("metrics", metrics_args, "[label=]metrics.csv");
  report->add_option("--rollouts", rollout_args, "[label=]rollouts.csv");
  report->add_option("--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfigError;
  }

  try {
    if (*gen) return RunGen(gen_flags, gen_extra);
    if (*train_rl) return RunTrain(rl_flags, true);
    if (*train_sl) return RunTrain(sl_flags, false);
    if (*eval) return RunEval(eval_flags, checkpoint);
    if (*report) return RunReport(metrics_args, rollout_args, report_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
