#ifndef FWDLEARN_ADAM_H_
#define FWDLEARN_ADAM_H_

#include <cstdint>

#include "fwdlearn/mlp.h"

namespace fwdlearn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// first/second moment estimates congruent to one network
struct AdamState {
  MlpParams m;
  MlpParams v;
  std::int64_t step = 0;

  static AdamState For(const MlpParams& params);
  bool operator==(const AdamState&) const = default;
};

struct ScalarAdamState {
  double m = 0.0;
  double v = 0.0;
  std::int64_t step = 0;
  bool operator==(const ScalarAdamState&) const = default;
};

// bias-corrected adaptive-moment update; advances state.step
void AdamStep(MlpParams& params, const MlpGrads& grads, AdamState& state,
              const AdamConfig& config);
void AdamStep(double& param, double grad, ScalarAdamState& state,
              const AdamConfig& config);

}  // namespace fwdlearn

#endif  // FWDLEARN_ADAM_H_
