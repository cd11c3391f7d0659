#include "fwdlearn/adam.h"

#include <cmath>

#include "fwdlearn/status.h"

namespace fwdlearn {

namespace {

template <typename P, typename G, typename M>
void UpdateBlock(P& param, const G& grad, M& m, M& v, const AdamConfig& c,
                 double bias1, double bias2) {
  m = c.beta1 * m + (1.0 - c.beta1) * grad;
  v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  param.array() -= c.lr * (m.array() / bias1) /
                   ((v.array() / bias2).sqrt() + c.eps);
}

}  // namespace

AdamState AdamState::For(const MlpParams& params) {
  return {MlpParams::Zeros(params.shape), MlpParams::Zeros(params.shape), 0};
}

void AdamStep(MlpParams& params, const MlpGrads& grads, AdamState& state,
              const AdamConfig& config) {
  if (!(grads.shape == params.shape) || !(state.m.shape == params.shape)) {
    throw ContractViolation("optimizer state is not congruent to the parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);
  for (size_t l = 0; l < params.layers.size(); ++l) {
    UpdateBlock(params.layers[l].weight, grads.layers[l].weight,
                state.m.layers[l].weight, state.v.layers[l].weight, config, bias1,
                bias2);
    UpdateBlock(params.layers[l].bias, grads.layers[l].bias, state.m.layers[l].bias,
                state.v.layers[l].bias, config, bias1, bias2);
  }
}

void AdamStep(double& param, double grad, ScalarAdamState& state,
              const AdamConfig& config) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * grad;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * grad * grad;
  const double m_hat = state.m / (1.0 - std::pow(config.beta1, t));
  const double v_hat = state.v / (1.0 - std::pow(config.beta2, t));
  param -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
}

}  // namespace fwdlearn
