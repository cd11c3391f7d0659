#include <cmath>

#include <gtest/gtest.h>

#include "fwdlearn/adam.h"
#include "fwdlearn/mlp.h"
#include "fwdlearn/quantile.h"
#include "fwdlearn/squashed_gaussian.h"
#include "checks.h"

namespace fwdlearn {
namespace {

TEST(Mish, Values) {
  EXPECT_EQ(Mish(0.0), 0.0);
  EXPECT_NEAR(Mish(1.0), 1.0 * std::tanh(std::log1p(std::exp(1.0))), 1e-15);
  EXPECT_NEAR(Mish(1.0), 0.865098, 5e-7);
  EXPECT_NEAR(Mish(20.0) / 20.0, 1.0, 1e-6);
  EXPECT_TRUE(std::isfinite(Mish(-800.0)));
  EXPECT_TRUE(std::isfinite(Mish(800.0)));
}

TEST(Mish, DerivativeMatchesDifferences) {
  for (double x = -8.0; x <= 25.0; x += 0.37) {
    const double fd = (Mish(x + 1e-6) - Mish(x - 1e-6)) / 2e-6;
    EXPECT_NEAR(MishDerivative(x), fd, 1e-7) << x;
  }
}

TEST(Mish, BatchedForwardMatchesScalar) {
  // a 1-1-1 net with unit weights isolates the hidden activation
  MlpParams p = MlpParams::Zeros({1, {1}, 1});
  p.layers[0].weight(0, 0) = 1.0;
  p.layers[1].weight(0, 0) = 1.0;
  Eigen::MatrixXd x(1, 9);
  x << -30, -5, -1, -1e-3, 0, 0.5, 3, 19.9, 40;
  const Eigen::MatrixXd y = Forward(p, x);
  for (int i = 0; i < x.cols(); ++i) {
    const double ref = x(i) * std::tanh(std::log1p(std::exp(x(i))));
    EXPECT_NEAR(y(i), ref, 1e-13 * std::max(1.0, std::abs(ref))) << x(i);
  }
}

TEST(Forward, ZeroNetGivesZero) {
  const MlpParams p = MlpParams::Zeros({5, {7, 3}, 2});
  EXPECT_EQ(ForwardOne(p, Eigen::VectorXd::Ones(5)), Eigen::VectorXd::Zero(2));
}

TEST(Forward, SingleLayerIsAffine) {
  Rng rng = MakeRng(3);
  const MlpParams p = MlpParams::Init({4, {}, 3}, rng);
  const Eigen::VectorXd x = testing::RandomMatrix(4, 1, rng);
  EXPECT_TRUE(ForwardOne(p, x).isApprox(p.layers[0].weight * x + p.layers[0].bias, 1e-15));
}

// independent loop evaluator
Eigen::VectorXd StraightLine(const MlpParams& p, const Eigen::VectorXd& input) {
  std::vector<double> act(input.data(), input.data() + input.size());
  for (size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    std::vector<double> next(layer.bias.size());
    for (int i = 0; i < layer.weight.rows(); ++i) {
      double s = layer.bias[i];
      for (int j = 0; j < layer.weight.cols(); ++j) s += layer.weight(i, j) * act[j];
      const bool hidden = l + 1 < p.layers.size();
      next[i] = hidden ? s * std::tanh(std::log1p(std::exp(s))) : s;
    }
    act = next;
  }
  return Eigen::Map<Eigen::VectorXd>(act.data(), act.size());
}

TEST(Forward, MatchesStraightLineEvaluator) {
  Rng rng = MakeRng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const MlpParams p = MlpParams::Init({6, {16, 9, 12}, 3}, rng);
    const Eigen::MatrixXd x = testing::RandomMatrix(6, 5, rng);
    const Eigen::MatrixXd batched = Forward(p, x);
    for (int b = 0; b < 5; ++b) {
      const Eigen::VectorXd ref = StraightLine(p, x.col(b));
      EXPECT_LE((batched.col(b) - ref).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Gradients, ConstantLossGivesZero) {
  Rng rng = MakeRng(5);
  const MlpParams p = MlpParams::Init({3, {4}, 2}, rng);
  MlpTape tape;
  Forward(p, testing::RandomMatrix(3, 4, rng), &tape);
  const MlpGrads g = Backward(p, tape, Eigen::MatrixXd::Zero(2, 4));
  EXPECT_EQ(g.Flatten(), Eigen::VectorXd::Zero(p.NumParams()));
}

TEST(Gradients, ScalarQuadratic) {
  // L = (w - 3)^2 through a 1-input linear layer with x = 1
  MlpParams p = MlpParams::Zeros({1, {}, 1});
  p.layers[0].weight(0, 0) = 1.0;
  MlpTape tape;
  const Eigen::MatrixXd out = Forward(p, Eigen::MatrixXd::Ones(1, 1), &tape);
  const MlpGrads g = Backward(p, tape, 2.0 * (out.array() - 3.0).matrix());
  EXPECT_EQ(g.layers[0].weight(0, 0), -4.0);
}

TEST(Gradients, InputGradient) {
  Rng rng = MakeRng(6);
  const MlpParams p = MlpParams::Init({3, {5}, 2}, rng);
  Eigen::MatrixXd x = testing::RandomMatrix(3, 1, rng);
  MlpTape tape;
  Forward(p, x, &tape);
  Eigen::MatrixXd dx;
  Backward(p, tape, Eigen::MatrixXd::Ones(2, 1), &dx);
  for (int i = 0; i < 3; ++i) {
    Eigen::MatrixXd up = x, down = x;
    up(i) += 1e-6;
    down(i) -= 1e-6;
    const double fd = (Forward(p, up).sum() - Forward(p, down).sum()) / 2e-6;
    EXPECT_NEAR(dx(i), fd, 1e-8);
  }
}

TEST(Gradients, MseHeadMatchesFiniteDifferences) {
  for (std::uint64_t t = 0; t < 20; ++t) EXPECT_LE(testing::SlGradTrial(t), 1e-4) << t;
}

TEST(Gradients, ActorObjectiveMatchesFiniteDifferences) {
  for (std::uint64_t t = 0; t < 20; ++t) EXPECT_LE(testing::ActorGradTrial(t), 1e-4) << t;
}

TEST(Gradients, QuantileCriticMatchesFiniteDifferences) {
  for (std::uint64_t t = 0; t < 20; ++t) EXPECT_LE(testing::CriticGradTrial(t), 1e-4) << t;
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  MlpParams p = MlpParams::Zeros({2, {}, 2});
  MlpGrads g = MlpParams::Zeros(p.shape);
  g.layers[0].weight << 1.0, -2.5, 40.0, -1.0;
  g.layers[0].bias << 3.0, -7.0;
  const Eigen::VectorXd before = p.Flatten();
  AdamState state = AdamState::For(p);
  AdamConfig config;
  config.lr = 1e-4;
  AdamStep(p, g, state, config);
  const Eigen::VectorXd expect = before - config.lr * g.Flatten().cwiseSign();
  EXPECT_LE((p.Flatten() - expect).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, ZeroGradientLeavesParams) {
  Rng rng = MakeRng(7);
  MlpParams p = MlpParams::Init({3, {4}, 2}, rng);
  const MlpParams before = p;
  AdamState state = AdamState::For(p);
  AdamStep(p, MlpParams::Zeros(p.shape), state, {});
  EXPECT_EQ(p, before);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, Deterministic) {
  Rng rng = MakeRng(8);
  MlpParams a = MlpParams::Init({3, {4}, 2}, rng);
  MlpParams b = a;
  const MlpGrads g = MlpParams::Init(a.shape, rng);
  AdamState sa = AdamState::For(a), sb = AdamState::For(b);
  for (int i = 0; i < 3; ++i) {
    AdamStep(a, g, sa, {});
    AdamStep(b, g, sb, {});
  }
  EXPECT_EQ(a, b);
  EXPECT_EQ(sa, sb);
  double x = 1.0, y = 1.0;
  ScalarAdamState xa, ya;
  AdamStep(x, 0.5, xa, {});
  AdamStep(y, 0.5, ya, {});
  EXPECT_EQ(x, y);
  EXPECT_NEAR(x, 1.0 - 3e-4, 1e-10);
}

TEST(SquashedGaussian, StandardNormalAtZero) {
  GaussianHeadOutput head{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  ActionBounds unit{Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)};
  Rng rng = MakeRng(9);
  const SquashedAction det = SquashedGaussianSample(head, unit, rng, true);
  EXPECT_EQ(det.action[0], 0.0);
  EXPECT_NEAR(det.log_prob, -0.5 * std::log(2.0 * M_PI) - std::log1p(1e-6), 1e-12);
  EXPECT_NEAR(det.log_prob, -0.918940, 1e-6);
  ActionBounds shifted{Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, 6.0)};
  EXPECT_EQ(SquashedGaussianSample(head, shifted, rng, true).action[0], 4.0);
}

TEST(SquashedGaussian, LogStdClamped) {
  Eigen::VectorXd raw(4);
  raw << 0.1, -0.2, 50.0, -50.0;
  const GaussianHeadOutput head = SplitGaussianHead(raw);
  EXPECT_EQ(head.log_std[0], kLogStdMax);
  EXPECT_EQ(head.log_std[1], kLogStdMin);
}

TEST(SquashedGaussian, SamplesStrictlyInsideBounds) {
  GaussianHeadOutput head{Eigen::Vector2d(0.5, -3.0), Eigen::Vector2d(kLogStdMax, 1.0)};
  ActionBounds bounds{Eigen::Vector2d(-0.1, 1.0), Eigen::Vector2d(0.1, 2.0)};
  Rng rng = MakeRng(10);
  for (int i = 0; i < 100000; ++i) {
    const SquashedAction a = SquashedGaussianSample(head, bounds, rng, false);
    ASSERT_TRUE((a.action.array() > bounds.low.array()).all());
    ASSERT_TRUE((a.action.array() < bounds.high.array()).all());
    ASSERT_TRUE(std::isfinite(a.log_prob));
  }
}

TEST(SquashedGaussian, DensityIntegratesToOne) {
  GaussianHeadOutput head{Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Constant(1, -0.5)};
  ActionBounds bounds{Eigen::VectorXd::Constant(1, -2.0), Eigen::VectorXd::Constant(1, 3.0)};
  // midpoint rule over the action interval
  const int n = 200000;
  const double width = (bounds.high[0] - bounds.low[0]) / n;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = bounds.low[0] + (i + 0.5) * width;
    const double u = std::atanh(2.0 * (a - bounds.low[0]) / (bounds.high[0] - bounds.low[0]) - 1.0);
    mass += std::exp(SquashedGaussianLogProb(head, bounds, Eigen::VectorXd::Constant(1, u))) *
            width;
  }
  EXPECT_NEAR(mass, 1.0, 1e-3);
}

TEST(SquashedGaussian, BatchMatchesSingleSample) {
  Rng rng = MakeRng(11);
  const Eigen::MatrixXd raw = testing::RandomMatrix(4, 3, rng);
  const Eigen::MatrixXd noise = testing::RandomMatrix(2, 3, rng);
  ActionBounds bounds{Eigen::Vector2d(-1, -2), Eigen::Vector2d(1, 0)};
  const SquashedBatch batch = SquashedGaussianForward(raw, bounds, noise);
  for (int b = 0; b < 3; ++b) {
    const GaussianHeadOutput head = SplitGaussianHead(raw.col(b));
    const Eigen::VectorXd u = head.mean + head.log_std.array().exp().matrix().cwiseProduct(noise.col(b));
    EXPECT_NEAR(batch.log_prob[b], SquashedGaussianLogProb(head, bounds, u), 1e-12);
    EXPECT_TRUE(batch.squashed.col(b).isApprox(u.array().tanh().matrix(), 1e-14));
  }
}

TEST(QuantileLoss, HandValues) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  EXPECT_EQ(QuantileFractions(1)[0], 0.5);
  EXPECT_NEAR(QuantileHuberLoss(zero, one), 0.25, 1e-12);
  EXPECT_NEAR(QuantileHuberLoss(zero, one, Eigen::VectorXd::Constant(1, 0.9)), 0.45, 1e-12);
  EXPECT_EQ(QuantileHuberLoss(one, Eigen::VectorXd::Ones(4)), 0.0);
}

TEST(QuantileLoss, Fractions) {
  const Eigen::VectorXd t = QuantileFractions(64);
  EXPECT_EQ(t.size(), 64);
  EXPECT_DOUBLE_EQ(t[0], 1.0 / 128.0);
  EXPECT_DOUBLE_EQ(t[63], 127.0 / 128.0);
}

TEST(QuantileLoss, NonNegativeAndZeroOnlyAtAgreement) {
  Rng rng = MakeRng(12);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd pred = testing::RandomMatrix(8, 1, rng, 3.0);
    const Eigen::VectorXd targets = testing::RandomMatrix(5, 1, rng, 3.0);
    EXPECT_GT(QuantileHuberLoss(pred, targets), 0.0);
  }
  EXPECT_EQ(QuantileHuberLoss(Eigen::VectorXd::Constant(8, 2.0), Eigen::VectorXd::Constant(3, 2.0)),
            0.0);
}

TEST(QuantileLoss, BatchMatchesColumns) {
  Rng rng = MakeRng(13);
  const Eigen::MatrixXd pred = testing::RandomMatrix(6, 4, rng);
  const Eigen::MatrixXd targets = testing::RandomMatrix(5, 4, rng, 2.0);
  const Eigen::VectorXd taus = QuantileFractions(6);
  Eigen::MatrixXd d_pred;
  const double batch = QuantileHuberLossBatch(pred, targets, taus, 1.0, &d_pred);
  double sum = 0.0;
  for (int b = 0; b < 4; ++b) {
    Eigen::VectorXd g;
    sum += QuantileHuberLoss(pred.col(b), targets.col(b), taus, 1.0, &g);
    EXPECT_TRUE(d_pred.col(b).isApprox(g / 4.0, 1e-12));
  }
  EXPECT_NEAR(batch, sum / 4.0, 1e-14);
}

TEST(SoftUpdate, Endpoints) {
  Rng rng = MakeRng(14);
  const MlpParams src = MlpParams::Init({3, {4}, 2}, rng);
  MlpParams target = MlpParams::Init({3, {4}, 2}, rng);
  const MlpParams start = target;
  SoftUpdate(target, src, 0.0);
  EXPECT_EQ(target, start);
  SoftUpdate(target, src, 1.0);
  EXPECT_EQ(target, src);
}

}  // namespace
}  // namespace fwdlearn
