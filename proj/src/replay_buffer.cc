#include "fwdlearn/replay_buffer.h"

#include <unordered_set>

#include "fwdlearn/status.h"

namespace fwdlearn {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be > 0");
}

void ReplayBuffer::Push(ReplayTransition transition) {
  if (size_ > 0) {
    const ReplayTransition& ref = at(0);
    if (transition.obs.size() != ref.obs.size() ||
        transition.action.size() != ref.action.size() ||
        transition.next_obs.size() != ref.next_obs.size()) {
      throw ContractViolation("transition shape differs from buffer contents");
    }
  }
  if (slots_.size() < capacity_) {
    slots_.push_back(std::move(transition));
    ++size_;
    return;
  }
  slots_[head_] = std::move(transition);
  head_ = (head_ + 1) % capacity_;
}

const ReplayTransition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ContractViolation("replay index out of range");
  return slots_[(head_ + i) % slots_.size()];
}

std::vector<std::size_t> ReplayBuffer::SampleIndices(std::size_t k, Rng& rng) const {
  if (k > size_) throw ContractViolation("cannot sample more transitions than stored");
  // Floyd's subset sampling
  std::vector<std::size_t> picked;
  picked.reserve(k);
  std::unordered_set<std::size_t> seen;
  seen.reserve(2 * k);
  for (std::size_t j = size_ - k; j < size_; ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    std::size_t t = dist(rng);
    if (seen.count(t)) t = j;
    seen.insert(t);
    picked.push_back(t);
  }
  return picked;
}

}  // namespace fwdlearn
