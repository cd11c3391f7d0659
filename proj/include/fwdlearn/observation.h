#ifndef FWDLEARN_OBSERVATION_H_
#define FWDLEARN_OBSERVATION_H_

#include <deque>

#include <Eigen/Dense>

#include "fwdlearn/dynsys.h"

namespace fwdlearn {

struct Frame {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
};

// FIFO window of the last w (state, action) frames, newest last.
class StackedObservation {
 public:
  StackedObservation() = default;
  explicit StackedObservation(int window);

  // evicts the oldest frame once the window is full
  void Push(Frame frame);

  int window() const { return window_; }
  int size() const { return static_cast<int>(frames_.size()); }
  const std::deque<Frame>& frames() const { return frames_; }
  const Frame& newest() const { return frames_.back(); }
  Frame& newest() { return frames_.back(); }

  // [s_0, a_0, s_1, a_1, ...] oldest first
  Eigen::VectorXd Flatten() const;

 private:
  int window_ = 0;
  std::deque<Frame> frames_;
};

// True frames ending at step t: frames t-w+1 .. t, where indices before 0
// repeat frame 0. The frame at the final state (t == length) reuses the last
// action of the episode.
StackedObservation StackWindow(const Episode& episode, int t, int window);

// flattened frames, each min-max scaled with the dataset scaler
Eigen::VectorXd EncodeObservation(const StackedObservation& obs, const Scaler& scaler);

// dataset action at step t, clamped to the last action at t == length
Eigen::VectorXd ActionAt(const Episode& episode, int t);

}  // namespace fwdlearn

#endif  // FWDLEARN_OBSERVATION_H_
