#ifndef FWDLEARN_CONFIG_H_
#define FWDLEARN_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fwdlearn/fwdenv.h"
#include "fwdlearn/sac.h"
#include "fwdlearn/sltrain.h"

namespace fwdlearn {

std::vector<int> DefaultEvalLengths();

// Everything a run needs. Text form is one `key = value` per line; `#`
// starts a comment. Keys are listed by ConfigKeys().
struct RunConfig {
  std::string system = "pendulum";
  double dt = 0.05;
  std::string dataset;
  std::string out_dir = "run";
  std::string label;
  std::uint64_t seed = 0;

  int episodes = 300;
  int eval_every = 10;
  int checkpoint_every = 100;
  int max_steps = 10000;
  int eval_episodes = 3;
  double holdout_fraction = 0.1;
  int mse_examples = 4096;
  // false leaves wall_ms empty so metrics files are reproducible byte for byte
  bool wall_clock = true;

  FwdEnvConfig env;
  SacConfig sac;
  SlConfig sl;
  std::vector<int> hidden = {64, 64};

  int gen_episodes = 60;
  int gen_max_len = 600;
  std::vector<std::string> gen_mix = {"random", "sinusoid", "bang_bang"};

  std::string checkpoint;
  std::vector<int> eval_lengths = DefaultEvalLengths();
  int overlay_episodes = 1;

  // pushes shared fields (window, hidden widths) into the sub-configs and
  // checks ranges; throws ConfigError
  void Finalize();
};

std::vector<std::string> ConfigKeys();

// throws ConfigError on unknown keys or bad values
void SetConfigValue(RunConfig& config, std::string_view key, std::string_view value);
RunConfig ParseRunConfig(std::string_view text);
RunConfig LoadRunConfig(const std::string& path);

// canonical key = value lines covering every key except those in skip
std::string EchoConfig(const RunConfig& config, const std::vector<std::string>& skip = {});

}  // namespace fwdlearn

#endif  // FWDLEARN_CONFIG_H_
