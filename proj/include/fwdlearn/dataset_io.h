#ifndef FWDLEARN_DATASET_IO_H_
#define FWDLEARN_DATASET_IO_H_

#include <filesystem>
#include <iosfwd>

#include "fwdlearn/dynsys.h"

namespace fwdlearn {

// Text container (.fwdt):
//   fwdt 1
//   system=<name>            state_dim=<n>   action_dim=<m>   dt=<seconds>
//   pos_dim=, wrap_positions=, action_low=, action_high=, param.<key>=,
//   provenance=<comma list>, episodes=<count>
//   episode <length> <source>
//   <length rows: s[0..n) a[0..m)>
//   <1 row: final state s[0..n)>
//   end
// Reals are written with 17 significant digits so parsing is lossless.
void WriteDatasetText(const Dataset& dataset, std::ostream& out);
Dataset ReadDatasetText(std::istream& in);

// Binary container (.fwdb), all integers and reals little-endian:
//   "FWDB" | u32 version=1 | u32 header_len | header (UTF-8, same key=value
//   lines as the text header plus sources=<per-episode comma list>)
//   u64 n_episodes, then per episode:
//   u64 length | f64 states[(length+1) * state_dim] | f64 actions[length * action_dim]
// States and actions are time-major (one full vector per step).
void WriteDatasetBinary(const Dataset& dataset, std::ostream& out);
Dataset ReadDatasetBinary(std::istream& in);

// dispatch on extension (.fwdt / .fwdb)
void SaveDataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset LoadDataset(const std::filesystem::path& path);

}  // namespace fwdlearn

#endif  // FWDLEARN_DATASET_IO_H_
