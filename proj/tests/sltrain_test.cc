#include <numeric>

#include <gtest/gtest.h>

#include "fwdlearn/fwdenv.h"
#include "fwdlearn/harness.h"
#include "fwdlearn/sac.h"
#include "fwdlearn/sltrain.h"
#include "fwdlearn/status.h"
#include "test_util.h"

namespace fwdlearn {
namespace {

Policy MakePolicy(const Dataset& d, int w, std::uint64_t seed = 1) {
  Rng rng = MakeRng(seed);
  return Policy::Create(MinMaxStats(d), DeltaBounds(d), w, {64, 64}, rng);
}

TEST(MakeSlExample, ConstantEpisodeHasZeroTarget) {
  Episode e(Eigen::MatrixXd::Constant(2, 6, 0.7), Eigen::MatrixXd::Zero(1, 5), "random");
  const SlExample ex = MakeSlExample(MassSpringDamperSpec(), e, 2, 3);
  EXPECT_EQ(ex.target, Eigen::VectorXd::Zero(1));
}

TEST(MakeSlExample, TargetFromResimulation) {
  const auto d = testing::MakeDataset("pendulum", 2, 80);
  const Episode& e = d->episodes[1];
  for (int t = 0; t < e.length(); ++t) {
    const Eigen::VectorXd next = StepSystem(e.state(t), e.action(t), d->system);
    const Eigen::VectorXd delta = PositionDelta(d->system, e.state(t), next);
    const SlExample ex = MakeSlExample(d->system, e, t, 5);
    EXPECT_EQ(ex.target, delta);
    // away from the wrap point this is the plain difference
    if (std::abs(next[0] - e.state(t)[0]) < 1.0) {
      EXPECT_NEAR(ex.target[0], SplitState(d->system, next).first[0] -
                                    SplitState(d->system, e.state(t)).first[0], 1e-15);
    }
  }
  EXPECT_THROW(MakeSlExample(d->system, e, e.length(), 5), DataError);
  EXPECT_THROW(MakeSlExample(d->system, e, -1, 5), DataError);
}

TEST(MakeSlExample, LayoutMatchesEnvironmentStack) {
  const auto d = testing::MakeDataset("pendulum", 1, 100);
  FwdEnvConfig cfg;
  cfg.window_w = 20;
  cfg.start_offset_max = 0;
  FwdEnv env(d, cfg);
  for (int t : {0, 3, 19, 20, 57}) {
    const SlExample ex = MakeSlExample(d->system, d->episodes[0], t, 20);
    EXPECT_EQ(ex.input.Flatten(), env.ResetTo(0, t).Flatten()) << t;
  }
}

TEST(SlPool, EncodesEveryExample) {
  const auto d = testing::MakeDataset("msd", 3, 30);
  const Policy p = MakePolicy(*d, 4);
  const SlPool pool = BuildSlPool(*d, p);
  ASSERT_EQ(pool.size(), 90);
  const SlExample ex = MakeSlExample(d->system, d->episodes[1], 7, 4);
  EXPECT_EQ(pool.inputs.col(37), EncodeObservation(ex.input, p.scaler));
  EXPECT_EQ(pool.targets.col(37), p.bounds.Normalize(ex.target));
  EXPECT_LT(pool.targets.cwiseAbs().maxCoeff(), 1.0);
  Rng rng = MakeRng(2);
  const SlPool sub = SubsamplePool(pool, 40, rng);
  EXPECT_EQ(sub.size(), 40);
  EXPECT_EQ(SubsamplePool(pool, 500, rng).size(), 90);
}

TEST(SlRound, ZeroLearningRateKeepsParams) {
  const auto d = testing::MakeDataset("msd", 4, 60);
  Policy p = MakePolicy(*d, 5);
  const MlpParams before = p.actor;
  AdamState opt = AdamState::For(p.actor);
  SlConfig config;
  config.lr = 0.0;
  config.batch_size = 32;
  config.minibatches_per_round = 5;
  Rng rng = MakeRng(3);
  const double mse = SlRound(p, opt, BuildSlPool(*d, p), config, rng);
  EXPECT_EQ(p.actor, before);
  EXPECT_TRUE(std::isfinite(mse));
  EXPECT_GT(mse, 0.0);
}

TEST(SlRound, SameSeedSameTrace) {
  const auto d = testing::MakeDataset("msd", 4, 60);
  auto trace = [&] {
    Policy p = MakePolicy(*d, 5);
    AdamState opt = AdamState::For(p.actor);
    SlConfig config;
    config.batch_size = 64;
    config.minibatches_per_round = 10;
    const SlPool pool = BuildSlPool(*d, p);
    std::vector<double> out;
    for (int r = 0; r < 5; ++r) {
      Rng rng = MakeRng(4, r);
      out.push_back(SlRound(p, opt, pool, config, rng));
    }
    return out;
  };
  EXPECT_EQ(trace(), trace());
}

TEST(SlRound, HeldOutLossFallsInSmoothedSense) {
  const auto data = testing::MakeDataset("msd", 60, 600, 2);
  const DatasetSplit split = SplitDataset(*data, 0.1);
  Policy p = MakePolicy(*split.train, 20);
  AdamState opt = AdamState::For(p.actor);
  const SlPool train = BuildSlPool(*split.train, p);
  const SlPool held = BuildSlPool(*split.held_out, p);
  const SlConfig config;
  std::vector<double> mse;
  for (int r = 0; r < 50; ++r) {
    Rng rng = MakeRng(5, 1000 + r);
    SlRound(p, opt, train, config, rng);
    mse.push_back(SlEvaluate(p, held));
  }
  double previous = std::numeric_limits<double>::infinity();
  for (int r = 0; r + 10 <= 50; ++r) {
    const double avg = std::accumulate(mse.begin() + r, mse.begin() + r + 10, 0.0) / 10.0;
    EXPECT_LE(avg, previous) << "window starting at round " << r + 1;
    previous = avg;
  }
}

TEST(SlLoss, MatchesDefinition) {
  const auto d = testing::MakeDataset("msd", 2, 20);
  const Policy p = MakePolicy(*d, 3);
  const SlPool pool = BuildSlPool(*d, p);
  const Eigen::MatrixXd out = Forward(p.actor, pool.inputs);
  const Eigen::MatrixXd mean_path = out.topRows(1).array().tanh().matrix();
  const double expect = (mean_path - pool.targets).squaredNorm() / pool.targets.size();
  EXPECT_NEAR(SlLoss(p.actor, pool.inputs, pool.targets), expect, 1e-15);
  EXPECT_NEAR(SlEvaluate(p, pool), expect, 1e-15);
}

TEST(Architecture, SupervisedAndRlActorsMatch) {
  const auto d = testing::MakeDataset("pendulum", 3, 80);
  const Policy sl = MakePolicy(*d, 20);
  SacConfig config;
  config.hidden = {64, 64};
  Rng rng = MakeRng(1);
  const SacAgent agent(MinMaxStats(*d), DeltaBounds(*d), 20, config, rng);
  EXPECT_EQ(sl.shape(), agent.actor().shape);
  EXPECT_EQ(ArchitectureHash(sl.shape()), ArchitectureHash(agent.actor().shape));
  EXPECT_EQ(sl.shape().Descriptor(), "mlp:60-64-64-2:mish");
  EXPECT_NE(ArchitectureHash(sl.shape()), ArchitectureHash({60, {64}, 2}));
}

}  // namespace
}  // namespace fwdlearn
