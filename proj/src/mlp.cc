#include "fwdlearn/mlp.h"

#include <cmath>

#include "fwdlearn/status.h"

namespace fwdlearn {

namespace {

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// tanh(softplus(x)) = n(n + 2) / (n(n + 2) + 2) with n = e^x; beyond this the
// ratio is 1 in double precision
constexpr double kMishSaturation = 20.0;

// Mish over an array with one exp per element
Eigen::ArrayXXd MishArray(const Eigen::ArrayXXd& x) {
  const Eigen::ArrayXXd n = x.min(kMishSaturation).exp();
  const Eigen::ArrayXXd num = n * (n + 2.0);
  return x * num / (num + 2.0);
}

// d mish / dx = t + x * 4 n (n + 1) / (n(n + 2) + 2)^2
Eigen::ArrayXXd MishDerivativeArray(const Eigen::ArrayXXd& x) {
  const Eigen::ArrayXXd n = x.min(kMishSaturation).exp();
  const Eigen::ArrayXXd den = n * (n + 2.0) + 2.0;
  return (den - 2.0) / den + x * 4.0 * n * (n + 1.0) / den.square();
}

}  // namespace

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double Mish(double x) { return x * std::tanh(Softplus(x)); }

double MishDerivative(double x) {
  const double t = std::tanh(Softplus(x));
  return t + x * (1.0 - t * t) * Sigmoid(x);
}

std::string MlpShape::Descriptor() const {
  std::string s = "mlp:" + std::to_string(input);
  for (int h : hidden) s += "-" + std::to_string(h);
  s += "-" + std::to_string(output) + ":mish";
  return s;
}

MlpParams MlpParams::Zeros(const MlpShape& shape) {
  if (shape.input < 1 || shape.output < 1) {
    throw ConfigError("network input and output widths must be positive");
  }
  MlpParams p;
  p.shape = shape;
  int in = shape.input;
  auto add = [&](int out) {
    if (out < 1) throw ConfigError("layer width must be positive");
    p.layers.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
    in = out;
  };
  for (int h : shape.hidden) add(h);
  add(shape.output);
  return p;
}

MlpParams MlpParams::Init(const MlpShape& shape, Rng& rng, double output_scale) {
  MlpParams p = Zeros(shape);
  for (size_t l = 0; l < p.layers.size(); ++l) {
    DenseLayer& layer = p.layers[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    const double scale = l + 1 == p.layers.size() ? output_scale : 1.0;
    for (Eigen::Index k = 0; k < layer.weight.size(); ++k) {
      layer.weight.data()[k] = scale * Uniform(rng, -bound, bound);
    }
    for (Eigen::Index k = 0; k < layer.bias.size(); ++k) {
      layer.bias[k] = scale * Uniform(rng, -bound, bound);
    }
  }
  return p;
}

Eigen::Index MlpParams::NumParams() const {
  Eigen::Index n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

Eigen::VectorXd MlpParams::Flatten() const {
  Eigen::VectorXd flat(NumParams());
  Eigen::Index k = 0;
  for (const auto& layer : layers) {
    flat.segment(k, layer.weight.size()) =
        Eigen::Map<const Eigen::VectorXd>(layer.weight.data(), layer.weight.size());
    k += layer.weight.size();
    flat.segment(k, layer.bias.size()) = layer.bias;
    k += layer.bias.size();
  }
  return flat;
}

void MlpParams::Assign(const Eigen::VectorXd& flat) {
  if (flat.size() != NumParams()) throw DataError("parameter vector size mismatch");
  Eigen::Index k = 0;
  for (auto& layer : layers) {
    Eigen::Map<Eigen::VectorXd>(layer.weight.data(), layer.weight.size()) =
        flat.segment(k, layer.weight.size());
    k += layer.weight.size();
    layer.bias = flat.segment(k, layer.bias.size());
    k += layer.bias.size();
  }
}

bool MlpParams::AllFinite() const {
  for (const auto& layer : layers) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

bool MlpParams::operator==(const MlpParams& other) const {
  if (!(shape == other.shape) || layers.size() != other.layers.size()) return false;
  for (size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weight != other.layers[l].weight ||
        layers[l].bias != other.layers[l].bias) {
      return false;
    }
  }
  return true;
}

Eigen::MatrixXd Forward(const MlpParams& params, const Eigen::MatrixXd& x,
                        MlpTape* tape) {
  if (x.rows() != params.shape.input) {
    throw DataError("network input width " + std::to_string(x.rows()) +
                    " != expected " + std::to_string(params.shape.input));
  }
  if (tape) {
    tape->inputs.clear();
    tape->hidden_pre.clear();
  }
  Eigen::MatrixXd a = x;
  const size_t n = params.layers.size();
  for (size_t l = 0; l < n; ++l) {
    const DenseLayer& layer = params.layers[l];
    Eigen::MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    if (tape) tape->inputs.push_back(std::move(a));
    if (l + 1 == n) return z;
    a = MishArray(z.array()).matrix();
    if (tape) tape->hidden_pre.push_back(std::move(z));
  }
  return a;  // unreachable: there is always an output layer
}

Eigen::VectorXd ForwardOne(const MlpParams& params, const Eigen::VectorXd& x) {
  return Forward(params, x);
}

MlpGrads Backward(const MlpParams& params, const MlpTape& tape,
                  const Eigen::MatrixXd& d_output, Eigen::MatrixXd* d_input) {
  const size_t n = params.layers.size();
  if (tape.inputs.size() != n) throw ContractViolation("tape does not match network");
  MlpGrads grads = MlpParams::Zeros(params.shape);
  Eigen::MatrixXd delta = d_output;
  for (size_t l = n; l-- > 0;) {
    grads.layers[l].weight.noalias() = delta * tape.inputs[l].transpose();
    grads.layers[l].bias = delta.rowwise().sum();
    if (l == 0 && !d_input) break;
    Eigen::MatrixXd d_a = params.layers[l].weight.transpose() * delta;
    if (l == 0) {
      *d_input = std::move(d_a);
      break;
    }
    delta = (d_a.array() * MishDerivativeArray(tape.hidden_pre[l - 1].array())).matrix();
  }
  return grads;
}

void SoftUpdate(MlpParams& target, const MlpParams& source, double tau) {
  if (!(target.shape == source.shape)) throw ContractViolation("soft update shape mismatch");
  for (size_t l = 0; l < target.layers.size(); ++l) {
    target.layers[l].weight =
        (1.0 - tau) * target.layers[l].weight + tau * source.layers[l].weight;
    target.layers[l].bias =
        (1.0 - tau) * target.layers[l].bias + tau * source.layers[l].bias;
  }
}

}  // namespace fwdlearn
