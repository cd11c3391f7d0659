#include "fwdlearn/policy.h"

#include "fwdlearn/status.h"

namespace fwdlearn {

Policy Policy::Create(const Scaler& scaler, const ActionBounds& bounds, int window_w,
                      const std::vector<int>& hidden, Rng& rng) {
  if (window_w < 1) throw ConfigError("window_w must be >= 1");
  if (bounds.dim() < 1 || scaler.dim() < 1) throw ConfigError("empty scaler or bounds");
  MlpShape shape{window_w * scaler.dim(), hidden, 2 * bounds.dim()};
  return {MlpParams::Init(shape, rng, 0.01), scaler, bounds, window_w};
}

Eigen::VectorXd Policy::Act(const StackedObservation& obs, bool explore, Rng& rng) const {
  return ActEncoded(EncodeObservation(obs, scaler), explore, rng);
}

Eigen::VectorXd Policy::ActEncoded(const Eigen::VectorXd& encoded, bool explore,
                                   Rng& rng) const {
  const GaussianHeadOutput head = SplitGaussianHead(ForwardOne(actor, encoded));
  return SquashedGaussianSample(head, bounds, rng, !explore).action;
}

std::uint64_t ArchitectureHash(const MlpShape& shape) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : shape.Descriptor()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace fwdlearn
