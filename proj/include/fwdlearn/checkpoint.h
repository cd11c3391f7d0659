#ifndef FWDLEARN_CHECKPOINT_H_
#define FWDLEARN_CHECKPOINT_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fwdlearn/adam.h"
#include "fwdlearn/dynsys.h"
#include "fwdlearn/mlp.h"
#include "fwdlearn/policy.h"
#include "fwdlearn/squashed_gaussian.h"

namespace fwdlearn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NetworkSection {
  std::string name;
  MlpParams params;
  bool has_optimizer = false;
  AdamState optimizer;

  bool operator==(const NetworkSection&) const = default;
};

// Binary model file ("FWDC"): little-endian f64 arrays, one section per network.
struct Checkpoint {
  std::string kind;         // "sac" or "sl"
  std::string config_echo;  // key=value lines of the producing run
  std::uint64_t rounds = 0;
  int window_w = 0;
  Scaler scaler;
  ActionBounds bounds;
  double log_alpha = 0.0;
  ScalarAdamState alpha_optimizer;
  std::vector<NetworkSection> networks;

  // throws DataError when missing
  const NetworkSection& Network(const std::string& name) const;
  bool operator==(const Checkpoint& other) const;
};

void WriteCheckpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint ReadCheckpoint(std::istream& in);

// writes to a temporary sibling and renames it into place
void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::string& path);

// the "actor" section as a usable forward model
Policy PolicyFromCheckpoint(const Checkpoint& ckpt);

}  // namespace fwdlearn

#endif  // FWDLEARN_CHECKPOINT_H_
