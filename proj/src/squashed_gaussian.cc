#include "fwdlearn/squashed_gaussian.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fwdlearn/status.h"

namespace fwdlearn {

namespace {

const double kHalfLogTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

Eigen::VectorXd ActionBounds::Normalize(const Eigen::VectorXd& a) const {
  return (2.0 * (a - low).array() / (high - low).array() - 1.0).matrix();
}

Eigen::VectorXd ActionBounds::Denormalize(const Eigen::VectorXd& squashed) const {
  Eigen::VectorXd a =
      (low.array() + 0.5 * (squashed.array() + 1.0) * (high - low).array()).matrix();
  // tanh rounds to +-1 for |u| > ~19
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a[i] = std::clamp(a[i], std::nextafter(low[i], high[i]), std::nextafter(high[i], low[i]));
  }
  return a;
}

double ActionBounds::LogScale() const {
  return (0.5 * (high - low).array()).log().sum();
}

GaussianHeadOutput SplitGaussianHead(const Eigen::VectorXd& raw) {
  if (raw.size() % 2 != 0) throw DataError("gaussian head needs an even width");
  const Eigen::Index n = raw.size() / 2;
  return {raw.head(n), raw.tail(n).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax)};
}

double SquashedGaussianLogProb(const GaussianHeadOutput& head,
                               const ActionBounds& bounds, const Eigen::VectorXd& u) {
  double lp = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double std_dev = std::exp(head.log_std[i]);
    const double z = (u[i] - head.mean[i]) / std_dev;
    const double t = std::tanh(u[i]);
    lp += -0.5 * z * z - head.log_std[i] - kHalfLogTwoPi -
          std::log(1.0 - t * t + kTanhEps);
  }
  return lp - bounds.LogScale();
}

SquashedAction SquashedGaussianSample(const GaussianHeadOutput& head,
                                      const ActionBounds& bounds, Rng& rng,
                                      bool deterministic) {
  Eigen::VectorXd u = head.mean;
  if (!deterministic) {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u[i] += std::exp(head.log_std[i]) * StandardNormal(rng);
    }
  }
  return {bounds.Denormalize(u.array().tanh().matrix()),
          SquashedGaussianLogProb(head, bounds, u)};
}

SquashedBatch SquashedGaussianForward(const Eigen::MatrixXd& raw,
                                      const ActionBounds& bounds,
                                      const Eigen::MatrixXd& noise) {
  const Eigen::Index n = raw.rows() / 2;
  if (raw.rows() != 2 * bounds.dim() || noise.rows() != n ||
      noise.cols() != raw.cols()) {
    throw DataError("squashed gaussian batch shape mismatch");
  }
  SquashedBatch b;
  b.noise = noise;
  const Eigen::ArrayXXd raw_log_std = raw.bottomRows(n).array();
  const Eigen::ArrayXXd log_std = raw_log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  b.clamp_mask =
      ((raw_log_std >= kLogStdMin) && (raw_log_std <= kLogStdMax)).cast<double>().matrix();
  b.std_dev = log_std.exp().matrix();
  const Eigen::ArrayXXd u = raw.topRows(n).array() + b.std_dev.array() * noise.array();
  const Eigen::ArrayXXd t = u.tanh();
  b.squashed = t.matrix();
  const Eigen::ArrayXXd per_dim = -0.5 * noise.array().square() - log_std -
                                  kHalfLogTwoPi - (1.0 - t.square() + kTanhEps).log();
  b.log_prob = per_dim.colwise().sum().matrix();
  b.log_prob.array() -= bounds.LogScale();
  return b;
}

Eigen::MatrixXd SquashedGaussianBackward(const SquashedBatch& batch,
                                         const Eigen::MatrixXd& d_squashed,
                                         const Eigen::RowVectorXd& d_log_prob) {
  const Eigen::Index n = batch.squashed.rows();
  const Eigen::ArrayXXd t = batch.squashed.array();
  const Eigen::ArrayXXd one_minus = 1.0 - t.square();
  // d log_prob / d u through the tanh correction
  const Eigen::ArrayXXd g = 2.0 * t * one_minus / (one_minus + kTanhEps);
  const Eigen::ArrayXXd d_lp = d_log_prob.replicate(n, 1).array();
  const Eigen::ArrayXXd d_u = d_squashed.array() * one_minus + d_lp * g;

  Eigen::MatrixXd d_raw(2 * n, batch.squashed.cols());
  d_raw.topRows(n) = d_u.matrix();
  // u depends on log_std through std * noise; log N adds -1 per dim
  d_raw.bottomRows(n) = ((d_u * batch.std_dev.array() * batch.noise.array() - d_lp) *
                         batch.clamp_mask.array())
                            .matrix();
  return d_raw;
}

}  // namespace fwdlearn
