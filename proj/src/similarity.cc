#include "fwdlearn/similarity.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "fwdlearn/status.h"

namespace fwdlearn {

namespace {

void CheckShapes(const Trajectory& y, const Trajectory& yhat, const char* op) {
  if (y.rows() != yhat.rows() || y.cols() != yhat.cols()) {
    throw DataError(std::string(op) + ": trajectory shape mismatch");
  }
  if (y.rows() < 1) throw DataError(std::string(op) + ": empty trajectory");
}

Eigen::VectorXd FlattenedDiffs(const Trajectory& y) {
  const Eigen::Index steps = y.rows() - 1;
  Eigen::VectorXd out(steps * y.cols());
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (Eigen::Index d = 0; d < y.cols(); ++d) {
      out[t * y.cols() + d] = y(t + 1, d) - y(t, d);
    }
  }
  return out;
}

double CorrelationDistance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0) return 0.0;
  if (a == b) return 0.0;
  const Eigen::ArrayXd ca = a.array() - a.mean();
  const Eigen::ArrayXd cb = b.array() - b.mean();
  const double va = ca.square().sum();
  const double vb = cb.square().sum();
  const bool a_const = !(va > 0.0);
  const bool b_const = !(vb > 0.0);
  if (a_const && b_const) return 0.0;
  if (a_const || b_const) return 1.0;
  const double r = (ca * cb).sum() / std::sqrt(va * vb);
  return std::clamp(1.0 - r, 0.0, 2.0);
}

Eigen::ArrayXd LogSoftmax(const Eigen::VectorXd& x) {
  const double m = x.maxCoeff();
  const double lse = m + std::log((x.array() - m).exp().sum());
  return x.array() - lse;
}

double Variance(const Eigen::VectorXd& x) {
  return (x.array() - x.mean()).square().mean();
}

}  // namespace

double RolloutLoss(const Trajectory& y, const Trajectory& yhat) {
  CheckShapes(y, yhat, "RolloutLoss");
  return (y - yhat).rowwise().norm().sum();
}

ZeTerms ComputeZeTerms(const Trajectory& y, const Trajectory& yhat) {
  CheckShapes(y, yhat, "SimilarityZe");
  ZeTerms terms;
  terms.l2 = (y - yhat).squaredNorm();
  if (y.rows() >= 2) {
    terms.corr = CorrelationDistance(FlattenedDiffs(y), FlattenedDiffs(yhat));
  }
  double kl = 0.0;
  for (Eigen::Index d = 0; d < y.cols(); ++d) {
    const Eigen::ArrayXd log_p = LogSoftmax(y.col(d));
    const Eigen::ArrayXd log_q = LogSoftmax(yhat.col(d));
    kl += (log_p.exp() * (log_p - log_q)).sum();
  }
  // rounding can leave a tiny negative value
  terms.kl = std::max(kl, 0.0);
  return terms;
}

double SimilarityZe(const Trajectory& y, const Trajectory& yhat) {
  return ComputeZeTerms(y, yhat).Product();
}

Eigen::MatrixXd DftMagnitude(const Trajectory& y) {
  Eigen::FFT<double> fft;
  Eigen::MatrixXd mag(y.rows(), y.cols());
  std::vector<double> in(y.rows());
  std::vector<std::complex<double>> out;
  for (Eigen::Index d = 0; d < y.cols(); ++d) {
    for (Eigen::Index t = 0; t < y.rows(); ++t) in[t] = y(t, d);
    fft.fwd(out, in);
    for (Eigen::Index k = 0; k < y.rows(); ++k) mag(k, d) = std::abs(out[k]);
  }
  return mag;
}

double SimplifiedSimilarity(const Trajectory& y, const Trajectory& yhat) {
  CheckShapes(y, yhat, "SimplifiedSimilarity");
  if (y.rows() < 2) throw DataError("SimplifiedSimilarity needs T >= 2");
  const double time_score = 1.0 / (1.0 + RmseRolloutMetric(y, yhat));
  const double freq_score =
      1.0 / (1.0 + RmseRolloutMetric(DftMagnitude(y), DftMagnitude(yhat)));
  double var_gap = 0.0;
  for (Eigen::Index d = 0; d < y.cols(); ++d) {
    var_gap += std::abs(Variance(y.col(d)) - Variance(yhat.col(d)));
  }
  const double power_score = 1.0 / (1.0 + var_gap);
  return (time_score + freq_score + power_score) / 3.0;
}

double RmseRolloutMetric(const Trajectory& y, const Trajectory& yhat) {
  CheckShapes(y, yhat, "RmseRolloutMetric");
  return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

SimilarityKind ParseSimilarityKind(std::string_view name) {
  if (name == "ze") return SimilarityKind::kZe;
  if (name == "simplified") return SimilarityKind::kSimplified;
  throw ConfigError("unknown similarity '" + std::string(name) + "'");
}

std::string ToString(SimilarityKind kind) {
  return kind == SimilarityKind::kZe ? "ze" : "simplified";
}

}  // namespace fwdlearn
