// End-to-end acceptance checks. Prints one PASS/WARN/FAIL line per check and
// exits non-zero if any check fails. `--only NAME` runs a single check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "checks.h"
#include "fwdlearn/checkpoint.h"
#include "fwdlearn/config.h"
#include "fwdlearn/dataset_io.h"
#include "fwdlearn/dynsys.h"
#include "fwdlearn/fwdenv.h"
#include "fwdlearn/harness.h"
#include "fwdlearn/quantile.h"
#include "fwdlearn/similarity.h"
#include "fwdlearn/sltrain.h"

namespace fs = std::filesystem;
using namespace fwdlearn;

namespace {

enum class Status { kPass, kWarn, kFail };

struct Outcome {
  Status status = Status::kFail;
  std::string detail;
};

struct Check {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome(const fs::path&)> run;
};

std::string Fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, a);
  return buf;
}

std::shared_ptr<const Dataset> Generate(const std::string& system, int episodes, int max_len,
                                        std::uint64_t seed) {
  const SystemSpec spec = MakeSystemSpec(system);
  const std::vector<std::string> mix(std::begin(kBehaviorPolicies), std::end(kBehaviorPolicies));
  return std::make_shared<const Dataset>(GenerateDataset(spec, mix, episodes, max_len, seed));
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome OracleZeroError(const fs::path&) {
  double worst_loss = 0.0, worst_reward = 0.0, worst_rmse = 0.0;
  bool all_rows = true;
  for (const std::string system : {"pendulum", "msd"}) {
    const auto data = Generate(system, 3, 1001, 1);
    FwdEnvConfig config;
    config.window_w = 10;
    config.rollout_h = 50;
    FwdEnv env(data, config);
    for (int ep = 0; ep < static_cast<int>(data->episodes.size()); ++ep) {
      env.ResetTo(ep, 0);
      while (!env.done()) {
        const StepResult r = env.Step(env.TrueDelta());
        worst_reward = std::max(worst_reward, std::abs(r.reward));
        if (r.rollout_terminal || r.terminal) {
          const RolloutState& s = env.state();
          const int end = static_cast<int>(s.predicted_traj.size());
          const int begin = std::max(0, end - config.rollout_h);
          worst_loss = std::max(worst_loss, RolloutLoss(ToTrajectory(s.true_traj, begin, end),
                                                        ToTrajectory(s.predicted_traj, begin, end)));
        }
      }
    }
    TrueDeltaPolicy oracle;
    const RolloutTable table = EvalRollouts(oracle, data, DefaultEvalLengths(), 3, 0, config);
    for (const auto& row : table.rows) {
      if (!row.mean_rmse || row.n_episodes != 3) {
        all_rows = false;
        continue;
      }
      worst_rmse = std::max(worst_rmse, *row.mean_rmse);
    }
  }
  const bool ok = all_rows && worst_loss <= 1e-9 && worst_reward <= 1e-9 && worst_rmse <= 1e-9;
  return {ok ? Status::kPass : Status::kFail,
          "max rollout_loss " + Fmt("%.3g", worst_loss) + ", max |reward| " +
              Fmt("%.3g", worst_reward) + ", max rmse over h=50..1000 " +
              Fmt("%.3g", worst_rmse) + (all_rows ? "" : ", missing rows") +
              " (limit 1e-9)"};
}

Outcome SimilarityExactness(const fs::path&) {
  Rng rng = MakeRng(5);
  bool identity = true, perfect = true;
  FwdEnvConfig config;
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory y = testing::RandomMatrix(1 + trial * 7, 1 + trial % 4, rng, 3.0);
    identity = identity && SimilarityZe(y, y) == 1.0;
    config.reward_mode = RewardMode::kPseudoSparse;
    perfect = perfect && RewardFn(y, y, true, config) == 0.0 && RewardFn(y, y, false, config) == 0.0;
  }
  const double worked = SimilarityZe(Trajectory::Zero(2, 1), Trajectory::Ones(2, 1));
  const bool ok = identity && perfect && std::abs(worked - 3.0) <= 1e-12;
  return {ok ? Status::kPass : Status::kFail,
          std::string("z_e(y,y)=1 ") + (identity ? "yes" : "no") + ", perfect segment reward 0 " +
              (perfect ? "yes" : "no") + ", worked example " + Fmt("%.17g", worked) +
              " (want 3 within 1e-12)"};
}

Outcome GradientFidelity(const fs::path&) {
  double sl = 0.0, actor = 0.0, critic = 0.0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    sl = std::max(sl, testing::SlGradTrial(s));
    actor = std::max(actor, testing::ActorGradTrial(s));
    critic = std::max(critic, testing::CriticGradTrial(s));
  }
  const bool ok = sl <= 1e-4 && actor <= 1e-4 && critic <= 1e-4;
  return {ok ? Status::kPass : Status::kFail,
          "20 trials each, max relative error mse " + Fmt("%.2e", sl) + ", actor " +
              Fmt("%.2e", actor) + ", quantile " + Fmt("%.2e", critic) + " (limit 1e-4)"};
}

Outcome QuantileBellmanSanity(const fs::path&) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  const double a = QuantileHuberLoss(zero, one);
  const double b = QuantileHuberLoss(zero, one, Eigen::VectorXd::Constant(1, 0.9));
  const double q = testing::ToyMdpResidual(2000);
  const bool ok = std::abs(a - 0.25) <= 1e-12 && std::abs(b - 0.45) <= 1e-12 && q < 1e-2;
  return {ok ? Status::kPass : Status::kFail,
          "huber " + Fmt("%.17g", a) + " and " + Fmt("%.17g", b) +
              " (want 0.25, 0.45 within 1e-12), toy MDP max |Q| after 2000 updates " +
              Fmt("%.3g", q) + " (limit 1e-2)"};
}

// Least squares of the normalized targets on [inputs; 1], solved from the
// normal equations. Stacked frames hold exactly collinear columns (velocity
// is the position difference over dt), so the Gram matrix is factored with a
// rank-revealing decomposition.
double OlsResidualMse(const SlPool& pool) {
  const Eigen::Index n = pool.inputs.rows();
  Eigen::MatrixXd x(n + 1, pool.size());
  x.topRows(n) = pool.inputs;
  x.row(n).setOnes();
  const Eigen::MatrixXd gram = x * x.transpose();
  const Eigen::MatrixXd rhs = x * pool.targets.transpose();
  const Eigen::MatrixXd beta = gram.completeOrthogonalDecomposition().solve(rhs);
  const Eigen::MatrixXd residual = beta.transpose() * x - pool.targets;
  return residual.squaredNorm() / static_cast<double>(residual.size());
}

Outcome SlLinearOracle(const fs::path& work) {
  RunConfig config;
  config.system = "msd";
  config.out_dir = (work / "sl_msd").string();
  config.episodes = 200;
  config.eval_every = 200;
  config.checkpoint_every = 200;
  config.eval_episodes = 1;
  config.wall_clock = false;
  config.seed = 1;
  config.Finalize();
  const auto data = Generate("msd", 60, 600, 1);
  const TrainSummary summary = TrainSl(config, data);
  const Policy policy = PolicyFromCheckpoint(LoadCheckpoint(summary.final_checkpoint));
  const DatasetSplit split = SplitDataset(*data, config.holdout_fraction);
  const SlPool train = BuildSlPool(*split.train, policy);
  const SlPool held_out = BuildSlPool(*split.held_out, policy);
  const double sl = SlEvaluate(policy, train);
  const double ols = OlsResidualMse(train);
  const bool ok = sl <= 1.1 * ols;
  return {ok ? Status::kPass : Status::kFail,
          "msd w=20, 200 rounds: SL one-step mse " + Fmt("%.3e", sl) + " (held-out " +
              Fmt("%.3e", SlEvaluate(policy, held_out)) + ") vs OLS residual " +
              Fmt("%.3e", ols) + " on " + std::to_string(train.size()) +
              " training examples (limit 1.1 x OLS)"};
}

// Shared by the comparative and conformance checks.
RunConfig PendulumRun(const fs::path& dir, std::uint64_t seed, int episodes) {
  RunConfig config;
  config.system = "pendulum";
  config.out_dir = dir.string();
  config.seed = seed;
  config.episodes = episodes;
  config.env.window_w = 10;
  config.env.rollout_h = 50;
  config.env.reward_mode = RewardMode::kFullySparse;
  config.env.similarity = SimilarityKind::kSimplified;
  config.wall_clock = false;
  config.Finalize();
  return config;
}

Outcome ComparativeTrend(const fs::path& work) {
  const auto data = Generate("pendulum", 60, 600, 1);
  const DatasetSplit split = SplitDataset(*data, 0.1);
  const int n_held = static_cast<int>(split.held_out->episodes.size());
  std::vector<double> rl50, rl500, sl50, sl500, smoke_early, smoke_end;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (const bool rl : {true, false}) {
      const RunConfig config =
          PendulumRun(work / ((rl ? "rl_s" : "sl_s") + std::to_string(seed)), seed, 300);
      const TrainSummary summary = rl ? TrainRl(config, data) : TrainSl(config, data);
      const Policy policy = PolicyFromCheckpoint(LoadCheckpoint(summary.final_checkpoint));
      const RolloutTable table =
          EvalRollouts(policy, split.held_out, {50, 500}, n_held, 0, config.env);
      (rl ? rl50 : sl50).push_back(table.rows[0].mean_rmse.value_or(NAN));
      (rl ? rl500 : sl500).push_back(table.rows[1].mean_rmse.value_or(NAN));
      std::printf("  %s seed %llu: rmse h=50 %.4f, h=500 %.4f\n", rl ? "rl" : "sl",
                  static_cast<unsigned long long>(seed), (rl ? rl50 : sl50).back(),
                  (rl ? rl500 : sl500).back());
      if (rl) {
        for (const auto& r : summary.records) {
          if (r.round == 10 && r.rmse_rollout) smoke_early.push_back(*r.rmse_rollout);
        }
        smoke_end.push_back(summary.records.back().rmse_rollout.value_or(NAN));
      }
    }
  }
  const double m_rl50 = Median(rl50), m_rl500 = Median(rl500);
  const double m_sl50 = Median(sl50), m_sl500 = Median(sl500);
  std::printf("  smoke: rl rmse_rollout episode 10 median %.4f, episode 300 median %.4f (%s)\n",
              Median(smoke_early), Median(smoke_end),
              Median(smoke_end) <= Median(smoke_early) ? "improved" : "not improved");
  Status status = Status::kFail;
  if (m_rl500 <= m_sl500) {
    status = Status::kPass;
  } else if (m_rl500 <= 1.1 * m_sl500) {
    status = Status::kWarn;
  }
  return {status, "pendulum w=10 h=50, 300 rounds x 3 seeds, " + std::to_string(n_held) +
                      " held-out episodes: median rmse h=500 rl " + Fmt("%.4f", m_rl500) +
                      " vs sl " + Fmt("%.4f", m_sl500) + "; h=50 rl " + Fmt("%.4f", m_rl50) +
                      " vs sl " + Fmt("%.4f", m_sl50)};
}

Outcome Reproducibility(const fs::path& work) {
  const auto data = Generate("pendulum", 60, 600, 1);
  int files = 0;
  std::vector<std::string> differing;
  for (const bool rl : {true, false}) {
    const std::string kind = rl ? "rl" : "sl";
    std::vector<TrainSummary> runs;
    for (const char* copy : {"a", "b"}) {
      RunConfig config = PendulumRun(work / (kind + "_" + copy), 7, 12);
      config.checkpoint_every = 4;
      runs.push_back(rl ? TrainRl(config, data) : TrainSl(config, data));
    }
    std::vector<std::pair<std::string, std::string>> pairs = {
        {runs[0].metrics_path, runs[1].metrics_path},
        {runs[0].final_checkpoint, runs[1].final_checkpoint}};
    for (size_t i = 0; i < runs[0].checkpoints.size() && i < runs[1].checkpoints.size(); ++i) {
      pairs.emplace_back(runs[0].checkpoints[i], runs[1].checkpoints[i]);
    }
    if (runs[0].checkpoints.size() != runs[1].checkpoints.size()) differing.push_back(kind + " checkpoint count");
    if (rl && runs[0].total_updates == 0) differing.push_back("rl made no updates");
    for (const auto& [a, b] : pairs) {
      ++files;
      const std::string ca = Slurp(a);
      if (ca.empty() || ca != Slurp(b)) differing.push_back(fs::path(a).filename().string());
    }
  }
  std::string detail = std::to_string(files) + " file pairs compared (metrics, periodic and final checkpoints)";
  for (const auto& d : differing) detail += "; differs: " + d;
  return {differing.empty() ? Status::kPass : Status::kFail, detail};
}

Outcome ProtocolConformance(const fs::path& work) {
  std::vector<std::string> problems;

  // checkpoint cadence over a full-length run with a small network
  const auto data = Generate("pendulum", 10, 120, 3);
  RunConfig config = PendulumRun(work / "cadence", 1, 300);
  config.hidden = {16, 16};
  config.sac.batch_size = 64;
  config.sac.n_quantiles = 8;
  config.eval_every = 100;
  config.Finalize();
  const TrainSummary summary = TrainRl(config, data);
  std::vector<std::string> names;
  for (const auto& p : summary.checkpoints) names.push_back(fs::path(p).filename().string());
  const std::vector<std::string> want = {CheckpointName(100), CheckpointName(200),
                                         CheckpointName(300)};
  if (names != want) problems.push_back("checkpoint files do not match 100/200/300");
  for (int i = 0; i < 3 && i < static_cast<int>(summary.checkpoints.size()); ++i) {
    if (LoadCheckpoint(summary.checkpoints[i]).rounds != static_cast<std::uint64_t>(100 * (i + 1))) {
      problems.push_back("checkpoint " + names[i] + " has the wrong round count");
    }
  }

  // rollout ends: floor(T / h) over episode lengths and horizons
  int cadence_cases = 0;
  for (const int len : {50, 99, 100, 101, 257, 1000}) {
    const auto one = Generate("msd", 1, len, 4);
    for (const int h : {1, 7, 50, 100}) {
      FwdEnvConfig env_config;
      env_config.window_w = 5;
      env_config.rollout_h = h;
      FwdEnv env(one, env_config);
      env.ResetTo(0, 0);
      int ends = 0;
      while (!env.done()) ends += env.Step(env.TrueDelta()).rollout_terminal ? 1 : 0;
      ++cadence_cases;
      if (ends != len / h) {
        problems.push_back("T=" + std::to_string(len) + " h=" + std::to_string(h) + " gave " +
                           std::to_string(ends) + " rollout ends");
      }
    }
  }

  int round_trips = 0;
  for (const std::string system : {"pendulum", "msd"}) {
    const auto d = Generate(system, 6, 200, 9);
    for (const char* ext : {".fwdt", ".fwdb"}) {
      const fs::path path = work / (system + ext);
      SaveDataset(*d, path);
      ++round_trips;
      if (!(LoadDataset(path) == *d)) problems.push_back(system + ext + " round trip lost data");
    }
  }

  std::string detail = "checkpoints " + (names.empty() ? std::string("none") : names.front());
  for (size_t i = 1; i < names.size(); ++i) detail += ", " + names[i];
  detail += "; " + std::to_string(cadence_cases) + " cadence cases; " +
            std::to_string(round_trips) + " dataset round trips";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty() ? Status::kPass : Status::kFail, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fwdlearn acceptance checks"};
  std::string only;
  std::string work_arg = "acceptance_work";
  app.add_option("--only", only, "run a single check by name");
  app.add_option("--work", work_arg, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Check> checks = {
      {1, "oracle_zero_error", 10, OracleZeroError},
      {2, "similarity_exactness", 1, SimilarityExactness},
      {3, "gradient_fidelity", 30, GradientFidelity},
      {4, "quantile_bellman_sanity", 60, QuantileBellmanSanity},
      {5, "sl_linear_oracle", 300, SlLinearOracle},
      {6, "comparative_trend", 1800, ComparativeTrend},
      {7, "reproducibility", 300, Reproducibility},
      {8, "protocol_conformance", 300, ProtocolConformance},
  };

  int failed = 0, ran = 0;
  for (const Check& check : checks) {
    if (!only.empty() && only != check.name) continue;
    ++ran;
    const fs::path work = fs::path(work_arg) / check.name;
    fs::remove_all(work);
    fs::create_directories(work);
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = check.run(work);
    } catch (const std::exception& e) {
      outcome = {Status::kFail, std::string("threw: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > check.budget_s) {
      outcome.status = Status::kFail;
      outcome.detail += "; over time budget";
    }
    const char* tag = outcome.status == Status::kPass ? "PASS"
                      : outcome.status == Status::kWarn ? "WARN"
                                                        : "FAIL";
    std::printf("[%s] %d %s: %s [%.1f s, budget %.0f s]\n", tag, check.id, check.name.c_str(),
                outcome.detail.c_str(), seconds, check.budget_s);
    std::fflush(stdout);
    if (outcome.status == Status::kFail) ++failed;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no check named '%s'\n", only.c_str());
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
