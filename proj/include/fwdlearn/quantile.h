#ifndef FWDLEARN_QUANTILE_H_
#define FWDLEARN_QUANTILE_H_

#include <Eigen/Dense>

namespace fwdlearn {

// midpoint fractions tau_i = (2i - 1) / (2n), i = 1..n
Eigen::VectorXd QuantileFractions(int n);

// Quantile Huber loss: mean over (i, j) of |tau_i - 1{u<0}| * Huber_kappa(u) / kappa
// with u = targets_j - pred_i. Writes dL/d(pred) when d_pred is given.
double QuantileHuberLoss(const Eigen::VectorXd& pred, const Eigen::VectorXd& targets,
                         const Eigen::VectorXd& taus, double kappa = 1.0,
                         Eigen::VectorXd* d_pred = nullptr);

// default midpoint fractions for pred.size() quantiles
double QuantileHuberLoss(const Eigen::VectorXd& pred, const Eigen::VectorXd& targets,
                         double kappa = 1.0);

// Column-wise batch (pred N x B, targets M x B); returns the batch mean and
// writes the gradient of that mean.
double QuantileHuberLossBatch(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& targets,
                              const Eigen::VectorXd& taus, double kappa,
                              Eigen::MatrixXd* d_pred);

}  // namespace fwdlearn

#endif  // FWDLEARN_QUANTILE_H_
