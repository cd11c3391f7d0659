#ifndef FWDLEARN_MLP_H_
#define FWDLEARN_MLP_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fwdlearn/rng.h"

namespace fwdlearn {

double Softplus(double x);
// x * tanh(softplus(x))
double Mish(double x);
double MishDerivative(double x);

struct MlpShape {
  int input = 0;
  std::vector<int> hidden;
  int output = 0;

  // e.g. "mlp:30-64-64-2:mish"
  std::string Descriptor() const;
  bool operator==(const MlpShape&) const = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Feed-forward network: Mish on hidden layers, identity on the output.
struct MlpParams {
  MlpShape shape;
  std::vector<DenseLayer> layers;

  static MlpParams Zeros(const MlpShape& shape);
  // uniform fan-in init U(-1/sqrt(in), 1/sqrt(in)); the last layer is
  // multiplied by output_scale
  static MlpParams Init(const MlpShape& shape, Rng& rng, double output_scale = 1.0);

  Eigen::Index NumParams() const;
  Eigen::VectorXd Flatten() const;
  void Assign(const Eigen::VectorXd& flat);
  bool AllFinite() const;

  bool operator==(const MlpParams& other) const;
};

// gradients share the parameter layout
using MlpGrads = MlpParams;

// activations kept by Forward for Backward
struct MlpTape {
  std::vector<Eigen::MatrixXd> inputs;       // input of every layer
  std::vector<Eigen::MatrixXd> hidden_pre;   // pre-activation of hidden layers
};

// x: input x batch
Eigen::MatrixXd Forward(const MlpParams& params, const Eigen::MatrixXd& x,
                        MlpTape* tape = nullptr);
Eigen::VectorXd ForwardOne(const MlpParams& params, const Eigen::VectorXd& x);

// Reverse-mode pass for dL/d(output). Returns parameter gradients; writes
// dL/d(input) when d_input is given.
MlpGrads Backward(const MlpParams& params, const MlpTape& tape,
                  const Eigen::MatrixXd& d_output, Eigen::MatrixXd* d_input = nullptr);

// target <- (1 - tau) * target + tau * source
void SoftUpdate(MlpParams& target, const MlpParams& source, double tau);

}  // namespace fwdlearn

#endif  // FWDLEARN_MLP_H_
