#ifndef FWDLEARN_REPLAY_BUFFER_H_
#define FWDLEARN_REPLAY_BUFFER_H_

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fwdlearn/rng.h"

namespace fwdlearn {

// One environment transition. Observations are stored already encoded
// (flattened and min-max scaled); the action is the raw position delta.
struct ReplayTransition {
  Eigen::VectorXd obs;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_obs;
  bool terminal = false;
};

// Fixed-capacity ring with FIFO eviction.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void Push(ReplayTransition transition);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  // i = 0 is the oldest stored transition
  const ReplayTransition& at(std::size_t i) const;

  // k distinct indices in [0, size()), uniform without replacement
  std::vector<std::size_t> SampleIndices(std::size_t k, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // slot of the oldest element once full
  std::vector<ReplayTransition> slots_;
};

}  // namespace fwdlearn

#endif  // FWDLEARN_REPLAY_BUFFER_H_
