#include "fwdlearn/observation.h"

#include "fwdlearn/status.h"

namespace fwdlearn {

StackedObservation::StackedObservation(int window) : window_(window) {
  if (window < 1) throw ConfigError("stack window must be >= 1");
}

void StackedObservation::Push(Frame frame) {
  frames_.push_back(std::move(frame));
  while (static_cast<int>(frames_.size()) > window_) frames_.pop_front();
}

Eigen::VectorXd StackedObservation::Flatten() const {
  if (frames_.empty()) return {};
  const Eigen::Index sd = frames_.front().state.size();
  const Eigen::Index ad = frames_.front().action.size();
  Eigen::VectorXd flat(static_cast<Eigen::Index>(frames_.size()) * (sd + ad));
  Eigen::Index k = 0;
  for (const auto& f : frames_) {
    flat.segment(k, sd) = f.state;
    flat.segment(k + sd, ad) = f.action;
    k += sd + ad;
  }
  return flat;
}

Eigen::VectorXd ActionAt(const Episode& episode, int t) {
  return episode.action(std::min(t, episode.length() - 1));
}

StackedObservation StackWindow(const Episode& episode, int t, int window) {
  if (t < 0 || t > episode.length()) {
    throw DataError("stack index " + std::to_string(t) + " outside episode");
  }
  StackedObservation obs(window);
  for (int k = t - window + 1; k <= t; ++k) {
    const int idx = std::max(k, 0);
    obs.Push({episode.state(idx), ActionAt(episode, idx)});
  }
  return obs;
}

Eigen::VectorXd EncodeObservation(const StackedObservation& obs, const Scaler& scaler) {
  const Eigen::VectorXd flat = obs.Flatten();
  const int frame = scaler.dim();
  if (frame == 0 || flat.size() % frame != 0) {
    throw DataError("observation frame width does not match the scaler");
  }
  Eigen::VectorXd out(flat.size());
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    out[k] = scaler.Scale(static_cast<int>(k % frame), flat[k]);
  }
  return out;
}

}  // namespace fwdlearn
