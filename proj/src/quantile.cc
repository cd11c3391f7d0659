#include "fwdlearn/quantile.h"

#include <cmath>

#include "fwdlearn/status.h"

namespace fwdlearn {

Eigen::VectorXd QuantileFractions(int n) {
  if (n < 1) throw ConfigError("need at least one quantile");
  Eigen::VectorXd taus(n);
  for (int i = 1; i <= n; ++i) taus[i - 1] = (2.0 * i - 1.0) / (2.0 * n);
  return taus;
}

double QuantileHuberLoss(const Eigen::VectorXd& pred, const Eigen::VectorXd& targets,
                         const Eigen::VectorXd& taus, double kappa,
                         Eigen::VectorXd* d_pred) {
  if (pred.size() != taus.size()) throw DataError("one fraction per quantile required");
  if (targets.size() < 1) throw DataError("quantile loss needs targets");
  if (!targets.allFinite()) throw DataError("non-finite quantile targets");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
  const double norm = 1.0 / static_cast<double>(pred.size() * targets.size());
  if (d_pred) d_pred->resize(pred.size());
  double loss = 0.0;
  const double* t = targets.data();
  const Eigen::Index m = targets.size();
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const double p = pred[i];
    const double tau = taus[i];
    double row_loss = 0.0;
    double row_grad = 0.0;
    // branch-free so the inner loop vectorizes
    for (Eigen::Index j = 0; j < m; ++j) {
      const double u = t[j] - p;
      const double abs_u = std::abs(u);
      const double weight = u < 0.0 ? 1.0 - tau : tau;
      const double huber = abs_u <= kappa ? 0.5 * u * u : kappa * (abs_u - 0.5 * kappa);
      const double d_huber = std::min(std::max(u, -kappa), kappa);
      row_loss += weight * huber;
      row_grad += weight * d_huber;
    }
    loss += row_loss / kappa;
    // du/dpred = -1
    if (d_pred) (*d_pred)[i] = -norm * row_grad / kappa;
  }
  return loss * norm;
}

double QuantileHuberLoss(const Eigen::VectorXd& pred, const Eigen::VectorXd& targets,
                         double kappa) {
  return QuantileHuberLoss(pred, targets,
                           QuantileFractions(static_cast<int>(pred.size())), kappa);
}

double QuantileHuberLossBatch(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& targets,
                              const Eigen::VectorXd& taus, double kappa,
                              Eigen::MatrixXd* d_pred) {
  if (pred.cols() != targets.cols()) throw DataError("quantile batch size mismatch");
  const Eigen::Index batch = pred.cols();
  const double inv_batch = 1.0 / static_cast<double>(batch);
  if (d_pred) d_pred->resize(pred.rows(), batch);
  double total = 0.0;
  Eigen::VectorXd grad;
  for (Eigen::Index b = 0; b < batch; ++b) {
    total += QuantileHuberLoss(pred.col(b), targets.col(b), taus, kappa,
                               d_pred ? &grad : nullptr);
    if (d_pred) d_pred->col(b) = grad * inv_batch;
  }
  return total * inv_batch;
}

}  // namespace fwdlearn
