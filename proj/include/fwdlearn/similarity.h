#ifndef FWDLEARN_SIMILARITY_H_
#define FWDLEARN_SIMILARITY_H_

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace fwdlearn {

// T timesteps (rows) x D dimensions (columns)
using Trajectory = Eigen::MatrixXd;

// sum over timesteps of the Euclidean norm of the per-step difference
double RolloutLoss(const Trajectory& y, const Trajectory& yhat);

// The three distances combined by SimilarityZe.
struct ZeTerms {
  double l2 = 0.0;    // sum of squared errors over all steps and dims
  double corr = 0.0;  // 1 - Pearson(diff(y), diff(yhat)), flattened time-major
  double kl = 0.0;    // sum over dims of KL(softmax_t(y) || softmax_t(yhat))

  double Product() const { return (1.0 + l2) * (1.0 + corr) * (1.0 + kl); }
};

// Correlation distance conventions: both difference sequences constant -> 0,
// exactly one constant -> 1, T < 2 counts as both constant.
ZeTerms ComputeZeTerms(const Trajectory& y, const Trajectory& yhat);

// (1 + l2)(1 + corr)(1 + kl), >= 1 with equality for identical inputs
double SimilarityZe(const Trajectory& y, const Trajectory& yhat);

// Mean of time, frequency and power view scores, each in (0, 1]:
//   time  1 / (1 + rmse(y, yhat))
//   freq  1 / (1 + rmse(|DFT y|, |DFT yhat|)), per-dimension magnitude spectra
//   power 1 / (1 + sum_d |var(y_d) - var(yhat_d)|)
double SimplifiedSimilarity(const Trajectory& y, const Trajectory& yhat);

// sqrt(mean over all T*D entries of the squared error)
double RmseRolloutMetric(const Trajectory& y, const Trajectory& yhat);

// per-dimension DFT magnitude spectrum, same shape as the input
Eigen::MatrixXd DftMagnitude(const Trajectory& y);

enum class SimilarityKind { kZe, kSimplified };

SimilarityKind ParseSimilarityKind(std::string_view name);
std::string ToString(SimilarityKind kind);

}  // namespace fwdlearn

#endif  // FWDLEARN_SIMILARITY_H_
