#include "fwdlearn/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fwdlearn/status.h"

namespace fwdlearn {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string Quote(std::string_view key) { return "'" + std::string(key) + "'"; }

long long ParseInteger(std::string_view key, std::string_view v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(Quote(key) + " expects an integer, got '" + std::string(v) + "'");
  }
  return out;
}

int ParseInt(std::string_view key, std::string_view v) {
  const long long x = ParseInteger(key, v);
  if (x < -2147483647LL || x > 2147483647LL) {
    throw ConfigError(Quote(key) + " is out of range");
  }
  return static_cast<int>(x);
}

double ParseReal(std::string_view key, std::string_view v) {
  // from_chars for double is missing on older libstdc++
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out)) {
    throw ConfigError(Quote(key) + " expects a finite number, got '" + s + "'");
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(Quote(key) + " expects true or false");
}

std::vector<std::string> ParseList(std::string_view v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto piece = Trim(v.substr(start, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<int> ParseIntList(std::string_view key, std::string_view v) {
  std::vector<int> out;
  for (const auto& piece : ParseList(v)) out.push_back(ParseInt(key, piece));
  if (out.empty()) throw ConfigError(Quote(key) + " expects a non-empty list");
  return out;
}

std::string Join(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

std::string Join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += xs[i];
  }
  return out;
}

std::string Real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct Field {
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string, Field, std::less<>>& Fields() {
  static const auto* fields = new std::map<std::string, Field, std::less<>>{
      {"system", {[](RunConfig& c, auto, auto v) { c.system = v; },
                  [](const RunConfig& c) { return c.system; }}},
      {"dt", {[](RunConfig& c, auto k, auto v) { c.dt = ParseReal(k, v); },
              [](const RunConfig& c) { return Real(c.dt); }}},
      {"dataset", {[](RunConfig& c, auto, auto v) { c.dataset = v; },
                   [](const RunConfig& c) { return c.dataset; }}},
      {"out", {[](RunConfig& c, auto, auto v) { c.out_dir = v; },
               [](const RunConfig& c) { return c.out_dir; }}},
      {"label", {[](RunConfig& c, auto, auto v) { c.label = v; },
                 [](const RunConfig& c) { return c.label; }}},
      {"seed", {[](RunConfig& c, auto k, auto v) {
                  const long long s = ParseInteger(k, v);
                  if (s < 0) throw ConfigError("'seed' must be >= 0");
                  c.seed = static_cast<std::uint64_t>(s);
                },
                [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"episodes", {[](RunConfig& c, auto k, auto v) { c.episodes = ParseInt(k, v); },
                    [](const RunConfig& c) { return std::to_string(c.episodes); }}},
      {"eval_every", {[](RunConfig& c, auto k, auto v) { c.eval_every = ParseInt(k, v); },
                      [](const RunConfig& c) { return std::to_string(c.eval_every); }}},
      {"checkpoint_every",
       {[](RunConfig& c, auto k, auto v) { c.checkpoint_every = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.checkpoint_every); }}},
      {"max_steps", {[](RunConfig& c, auto k, auto v) { c.max_steps = ParseInt(k, v); },
                     [](const RunConfig& c) { return std::to_string(c.max_steps); }}},
      {"eval_episodes",
       {[](RunConfig& c, auto k, auto v) { c.eval_episodes = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.eval_episodes); }}},
      {"holdout_fraction",
       {[](RunConfig& c, auto k, auto v) { c.holdout_fraction = ParseReal(k, v); },
        [](const RunConfig& c) { return Real(c.holdout_fraction); }}},
      {"mse_examples",
       {[](RunConfig& c, auto k, auto v) { c.mse_examples = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.mse_examples); }}},
      {"wall_clock", {[](RunConfig& c, auto k, auto v) { c.wall_clock = ParseBool(k, v); },
                      [](const RunConfig& c) {
                        return std::string(c.wall_clock ? "true" : "false");
                      }}},
      {"hidden", {[](RunConfig& c, auto k, auto v) { c.hidden = ParseIntList(k, v); },
                  [](const RunConfig& c) { return Join(c.hidden); }}},
      {"env.window_w",
       {[](RunConfig& c, auto k, auto v) { c.env.window_w = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.env.window_w); }}},
      {"env.rollout_h",
       {[](RunConfig& c, auto k, auto v) { c.env.rollout_h = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.env.rollout_h); }}},
      {"env.start_offset_max",
       {[](RunConfig& c, auto k, auto v) { c.env.start_offset_max = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.env.start_offset_max); }}},
      {"env.reward_mode",
       {[](RunConfig& c, auto, auto v) { c.env.reward_mode = ParseRewardMode(v); },
        [](const RunConfig& c) { return ToString(c.env.reward_mode); }}},
      {"env.similarity",
       {[](RunConfig& c, auto, auto v) { c.env.similarity = ParseSimilarityKind(v); },
        [](const RunConfig& c) { return ToString(c.env.similarity); }}},
      {"sac.batch_size",
       {[](RunConfig& c, auto k, auto v) { c.sac.batch_size = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.sac.batch_size); }}},
      {"sac.n_quantiles",
       {[](RunConfig& c, auto k, auto v) { c.sac.n_quantiles = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.sac.n_quantiles); }}},
      {"sac.gamma", {[](RunConfig& c, auto k, auto v) { c.sac.gamma = ParseReal(k, v); },
                     [](const RunConfig& c) { return Real(c.sac.gamma); }}},
      {"sac.tau_soft",
       {[](RunConfig& c, auto k, auto v) { c.sac.tau_soft = ParseReal(k, v); },
        [](const RunConfig& c) { return Real(c.sac.tau_soft); }}},
      {"sac.lr_actor",
       {[](RunConfig& c, auto k, auto v) { c.sac.lr_actor = ParseReal(k, v); },
        [](const RunConfig& c) { return Real(c.sac.lr_actor); }}},
      {"sac.lr_critic",
       {[](RunConfig& c, auto k, auto v) { c.sac.lr_critic = ParseReal(k, v); },
        [](const RunConfig& c) { return Real(c.sac.lr_critic); }}},
      {"sac.lr_alpha",
       {[](RunConfig& c, auto k, auto v) { c.sac.lr_alpha = ParseReal(k, v); },
        [](const RunConfig& c) { return Real(c.sac.lr_alpha); }}},
      {"sac.target_entropy",
       {[](RunConfig& c, auto k, auto v) {
          if (v == "auto") {
            c.sac.target_entropy.reset();
          } else {
            c.sac.target_entropy = ParseReal(k, v);
          }
        },
        [](const RunConfig& c) {
          return c.sac.target_entropy ? Real(*c.sac.target_entropy) : std::string("auto");
        }}},
      {"sac.updates_per_episode",
       {[](RunConfig& c, auto k, auto v) { c.sac.updates_per_episode = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.sac.updates_per_episode); }}},
      {"sac.buffer_capacity",
       {[](RunConfig& c, auto k, auto v) {
          const long long n = ParseInteger(k, v);
          if (n < 1) throw ConfigError("'sac.buffer_capacity' must be >= 1");
          c.sac.buffer_capacity = static_cast<std::size_t>(n);
        },
        [](const RunConfig& c) { return std::to_string(c.sac.buffer_capacity); }}},
      {"sac.initial_alpha",
       {[](RunConfig& c, auto k, auto v) { c.sac.initial_alpha = ParseReal(k, v); },
        [](const RunConfig& c) { return Real(c.sac.initial_alpha); }}},
      {"sac.kappa", {[](RunConfig& c, auto k, auto v) { c.sac.kappa = ParseReal(k, v); },
                     [](const RunConfig& c) { return Real(c.sac.kappa); }}},
      {"sl.batch_size",
       {[](RunConfig& c, auto k, auto v) { c.sl.batch_size = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.sl.batch_size); }}},
      {"sl.minibatches_per_round",
       {[](RunConfig& c, auto k, auto v) { c.sl.minibatches_per_round = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.sl.minibatches_per_round); }}},
      {"sl.lr", {[](RunConfig& c, auto k, auto v) { c.sl.lr = ParseReal(k, v); },
                 [](const RunConfig& c) { return Real(c.sl.lr); }}},
      {"gen.episodes",
       {[](RunConfig& c, auto k, auto v) { c.gen_episodes = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.gen_episodes); }}},
      {"gen.max_len", {[](RunConfig& c, auto k, auto v) { c.gen_max_len = ParseInt(k, v); },
                       [](const RunConfig& c) { return std::to_string(c.gen_max_len); }}},
      {"gen.mix", {[](RunConfig& c, auto, auto v) { c.gen_mix = ParseList(v); },
                   [](const RunConfig& c) { return Join(c.gen_mix); }}},
      {"eval.checkpoint", {[](RunConfig& c, auto, auto v) { c.checkpoint = v; },
                           [](const RunConfig& c) { return c.checkpoint; }}},
      {"eval.lengths",
       {[](RunConfig& c, auto k, auto v) { c.eval_lengths = ParseIntList(k, v); },
        [](const RunConfig& c) { return Join(c.eval_lengths); }}},
      {"eval.overlay_episodes",
       {[](RunConfig& c, auto k, auto v) { c.overlay_episodes = ParseInt(k, v); },
        [](const RunConfig& c) { return std::to_string(c.overlay_episodes); }}},
  };
  return *fields;
}

}  // namespace

std::vector<int> DefaultEvalLengths() {
  std::vector<int> out = {50};
  for (int h = 100; h <= 1000; h += 100) out.push_back(h);
  return out;
}

void RunConfig::Finalize() {
  MakeSystemSpec(system, dt);
  env.Validate();
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string("'") + name + "' must be >= 1");
  };
  positive(episodes, "episodes");
  positive(eval_every, "eval_every");
  positive(checkpoint_every, "checkpoint_every");
  positive(max_steps, "max_steps");
  positive(eval_episodes, "eval_episodes");
  positive(mse_examples, "mse_examples");
  positive(gen_episodes, "gen.episodes");
  positive(gen_max_len, "gen.max_len");
  if (overlay_episodes < 0) throw ConfigError("'eval.overlay_episodes' must be >= 0");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw ConfigError("'holdout_fraction' must be in [0, 1)");
  }
  for (int h : eval_lengths) positive(h, "eval.lengths");
  for (const auto& name : gen_mix) {
    bool known = false;
    for (auto p : kBehaviorPolicies) known = known || p == name;
    if (!known) throw ConfigError("unknown behavior policy '" + name + "' in gen.mix");
  }
  if (gen_mix.empty()) throw ConfigError("'gen.mix' must not be empty");
  sac.hidden = hidden;
  sl.hidden = hidden;
  sl.window_w = env.window_w;
  sac.Validate();
  sl.Validate();
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : Fields()) keys.push_back(k);
  return keys;
}

void SetConfigValue(RunConfig& config, std::string_view key, std::string_view value) {
  const auto it = Fields().find(key);
  if (it == Fields().end()) throw ConfigError("unknown config key " + Quote(key));
  it->second.set(config, key, Trim(value));
}

RunConfig ParseRunConfig(std::string_view text) {
  RunConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = Trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      SetConfigValue(config, Trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.Finalize();
  return config;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return ParseRunConfig(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string EchoConfig(const RunConfig& config, const std::vector<std::string>& skip) {
  std::string out;
  for (const auto& [key, field] : Fields()) {
    if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
    out += key + " = " + field.get(config) + "\n";
  }
  return out;
}

}  // namespace fwdlearn
