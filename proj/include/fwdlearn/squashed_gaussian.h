#ifndef FWDLEARN_SQUASHED_GAUSSIAN_H_
#define FWDLEARN_SQUASHED_GAUSSIAN_H_

#include <Eigen/Dense>

#include "fwdlearn/rng.h"

namespace fwdlearn {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kTanhEps = 1e-6;

struct ActionBounds {
  Eigen::VectorXd low;
  Eigen::VectorXd high;

  int dim() const { return static_cast<int>(low.size()); }
  // maps [low, high] to [-1, 1]
  Eigen::VectorXd Normalize(const Eigen::VectorXd& a) const;
  // maps [-1, 1] to [low, high], kept strictly inside the open interval
  Eigen::VectorXd Denormalize(const Eigen::VectorXd& squashed) const;
  // sum of log((high - low) / 2), the log-Jacobian of Denormalize
  double LogScale() const;
  bool operator==(const ActionBounds& other) const {
    return low == other.low && high == other.high;
  }
};

struct GaussianHeadOutput {
  Eigen::VectorXd mean;
  Eigen::VectorXd log_std;  // clamped to [kLogStdMin, kLogStdMax]
};

// raw network output [mean..., log_std...] -> head with clamped log_std
GaussianHeadOutput SplitGaussianHead(const Eigen::VectorXd& raw);

struct SquashedAction {
  Eigen::VectorXd action;
  double log_prob = 0.0;
};

// u ~ N(mean, std^2) (u = mean when deterministic), a = low + (tanh(u)+1)/2 (high-low)
SquashedAction SquashedGaussianSample(const GaussianHeadOutput& head,
                                      const ActionBounds& bounds, Rng& rng,
                                      bool deterministic);

// density of the action produced from pre-squash value u
double SquashedGaussianLogProb(const GaussianHeadOutput& head,
                               const ActionBounds& bounds, const Eigen::VectorXd& u);

// Batched reparameterized sampling used by training. raw is the actor output
// (2A x B), noise is A x B standard normal (zeros for the mean path).
struct SquashedBatch {
  Eigen::MatrixXd noise;
  Eigen::MatrixXd std_dev;
  Eigen::MatrixXd squashed;  // tanh(u), in (-1, 1)
  Eigen::RowVectorXd log_prob;
  Eigen::MatrixXd clamp_mask;  // 1 where raw log_std was inside the clamp range
};

SquashedBatch SquashedGaussianForward(const Eigen::MatrixXd& raw,
                                      const ActionBounds& bounds,
                                      const Eigen::MatrixXd& noise);

// dL/d(raw) from dL/d(squashed) and dL/d(log_prob)
Eigen::MatrixXd SquashedGaussianBackward(const SquashedBatch& batch,
                                         const Eigen::MatrixXd& d_squashed,
                                         const Eigen::RowVectorXd& d_log_prob);

}  // namespace fwdlearn

#endif  // FWDLEARN_SQUASHED_GAUSSIAN_H_
