#include "fwdlearn/dynsys.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fwdlearn/rng.h"
#include "fwdlearn/status.h"

namespace fwdlearn {

namespace {

constexpr double kPi = std::numbers::pi;

void CheckFinite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw InputDomainError(std::string("non-finite ") + what);
  }
}

void CheckStepInputs(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                     const SystemSpec& spec) {
  if (state.size() != spec.state_dim || action.size() != spec.action_dim) {
    throw DataError("state/action dimension mismatch for system " + spec.name);
  }
  CheckFinite(state, "state");
  CheckFinite(action, "action");
  for (int i = 0; i < spec.action_dim; ++i) {
    if (action[i] < spec.action_low[i] || action[i] > spec.action_high[i]) {
      std::ostringstream msg;
      msg << "action[" << i << "]=" << action[i] << " outside ["
          << spec.action_low[i] << ", " << spec.action_high[i] << "]";
      throw InputDomainError(msg.str());
    }
  }
}

// behavior policy for dataset generation, one instance per episode
class BehaviorPolicy {
 public:
  BehaviorPolicy(std::string name, const SystemSpec& spec, Rng& rng)
      : name_(std::move(name)), spec_(spec) {
    int n = spec.action_dim;
    mid_ = 0.5 * (spec.action_low + spec.action_high);
    half_ = 0.5 * (spec.action_high - spec.action_low);
    if (name_ == "sinusoid") {
      amplitude_.resize(n);
      frequency_.resize(n);
      phase_.resize(n);
      for (int i = 0; i < n; ++i) {
        amplitude_[i] = Uniform(rng, 0.3, 1.0) * half_[i];
        frequency_[i] = Uniform(rng, 0.1, 1.0);  // Hz
        phase_[i] = Uniform(rng, 0.0, 2.0 * kPi);
      }
    } else if (name_ == "bang_bang") {
      level_ = Eigen::VectorXd::Ones(n);
      if (Uniform(rng, 0.0, 1.0) < 0.5) level_ = -level_;
      hold_ = 0;
    } else if (name_ != "random") {
      throw ConfigError("unknown behavior policy '" + name_ + "'");
    }
  }

  Eigen::VectorXd Act(int t, Rng& rng) {
    int n = spec_.action_dim;
    Eigen::VectorXd a(n);
    if (name_ == "random") {
      for (int i = 0; i < n; ++i) {
        a[i] = Uniform(rng, spec_.action_low[i], spec_.action_high[i]);
      }
    } else if (name_ == "sinusoid") {
      double time = t * spec_.dt;
      for (int i = 0; i < n; ++i) {
        a[i] = mid_[i] + amplitude_[i] *
                             std::sin(2.0 * kPi * frequency_[i] * time + phase_[i]);
      }
    } else {
      if (hold_ <= 0) {
        level_ = -level_;
        hold_ = UniformInt(rng, 5, 40);
      }
      --hold_;
      a = mid_ + level_.cwiseProduct(half_);
    }
    return a.cwiseMax(spec_.action_low).cwiseMin(spec_.action_high);
  }

 private:
  std::string name_;
  const SystemSpec& spec_;
  Eigen::VectorXd mid_, half_;
  Eigen::VectorXd amplitude_, frequency_, phase_;
  Eigen::VectorXd level_;
  int hold_ = 0;
};

Eigen::VectorXd InitialState(const SystemSpec& spec, Rng& rng) {
  Eigen::VectorXd s(spec.state_dim);
  for (int i = 0; i < spec.pos_dim; ++i) {
    s[i] = spec.wrap_positions ? WrapAngle(Uniform(rng, -kPi, kPi))
                               : Uniform(rng, -1.0, 1.0);
  }
  for (int i = spec.pos_dim; i < spec.state_dim; ++i) {
    s[i] = Uniform(rng, -1.0, 1.0);
  }
  return s;
}

}  // namespace

void SystemSpec::Validate() const {
  if (state_dim < 1 || action_dim < 1) {
    throw ConfigError("system dimensions must be positive");
  }
  if (pos_dim < 1 || 2 * pos_dim != state_dim) {
    throw ConfigError("state must be [qpos, qvel] with equal halves");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (action_low.size() != action_dim || action_high.size() != action_dim) {
    throw ConfigError("action bounds do not match action_dim");
  }
  if (!(action_low.array() < action_high.array()).all()) {
    throw ConfigError("action_low must be < action_high");
  }
}

double SystemSpec::Param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

SystemSpec PendulumSpec(double dt) {
  SystemSpec spec;
  spec.name = "pendulum";
  spec.state_dim = 2;
  spec.action_dim = 1;
  spec.pos_dim = 1;
  spec.dt = dt;
  spec.action_low = Eigen::VectorXd::Constant(1, -2.0);
  spec.action_high = Eigen::VectorXd::Constant(1, 2.0);
  spec.params = {{"g", 9.81}, {"l", 1.0}, {"m", 1.0}, {"c", 0.1}};
  spec.wrap_positions = true;
  return spec;
}

SystemSpec MassSpringDamperSpec(double dt) {
  SystemSpec spec;
  spec.name = "msd";
  spec.state_dim = 2;
  spec.action_dim = 1;
  spec.pos_dim = 1;
  spec.dt = dt;
  spec.action_low = Eigen::VectorXd::Constant(1, -1.0);
  spec.action_high = Eigen::VectorXd::Constant(1, 1.0);
  spec.params = {{"k", 1.0}, {"m", 1.0}, {"c", 0.2}};
  return spec;
}

SystemSpec MakeSystemSpec(std::string_view name, double dt) {
  if (name == "pendulum") return PendulumSpec(dt);
  if (name == "msd") return MassSpringDamperSpec(dt);
  throw ConfigError("unknown system '" + std::string(name) + "'");
}

double WrapAngle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);
  return wrapped <= -kPi ? wrapped + 2.0 * kPi : wrapped;
}

Eigen::VectorXd StepPendulum(const Eigen::VectorXd& state,
                             const Eigen::VectorXd& action,
                             const SystemSpec& spec) {
  CheckStepInputs(state, action, spec);
  const double g = spec.Param("g", 9.81);
  const double l = spec.Param("l", 1.0);
  const double m = spec.Param("m", 1.0);
  const double c = spec.Param("c", 0.1);
  const double theta = state[0];
  const double omega = state[1];
  const double u = action[0];

  double omega_next =
      omega + spec.dt * (-(g / l) * std::sin(theta) - c * omega + u / (m * l * l));
  double theta_next = WrapAngle(theta + spec.dt * omega_next);
  Eigen::VectorXd next(2);
  next << theta_next, omega_next;
  return next;
}

Eigen::VectorXd StepMassSpringDamper(const Eigen::VectorXd& state,
                                     const Eigen::VectorXd& action,
                                     const SystemSpec& spec) {
  CheckStepInputs(state, action, spec);
  const double k = spec.Param("k", 1.0);
  const double m = spec.Param("m", 1.0);
  const double c = spec.Param("c", 0.2);
  const double x = state[0];
  const double v = state[1];
  const double u = action[0];

  double v_next = v + spec.dt * (-(k / m) * x - (c / m) * v + u / m);
  double x_next = x + spec.dt * v_next;
  Eigen::VectorXd next(2);
  next << x_next, v_next;
  return next;
}

Eigen::VectorXd StepSystem(const Eigen::VectorXd& state,
                           const Eigen::VectorXd& action,
                           const SystemSpec& spec) {
  if (spec.name == "pendulum") return StepPendulum(state, action, spec);
  if (spec.name == "msd") return StepMassSpringDamper(state, action, spec);
  throw ConfigError("no stepper for system '" + spec.name + "'");
}

double PendulumEnergy(const Eigen::VectorXd& state, const SystemSpec& spec) {
  const double g = spec.Param("g", 9.81);
  const double l = spec.Param("l", 1.0);
  const double m = spec.Param("m", 1.0);
  return 0.5 * m * l * l * state[1] * state[1] - m * g * l * std::cos(state[0]);
}

Episode::Episode(Eigen::MatrixXd states, Eigen::MatrixXd actions,
                 std::string source)
    : states_(std::move(states)),
      actions_(std::move(actions)),
      source_(std::move(source)) {
  if (actions_.cols() < 1) throw DataError("episode must have length >= 1");
  if (states_.cols() != actions_.cols() + 1) {
    throw DataError("episode needs exactly length+1 states");
  }
  if (!states_.allFinite() || !actions_.allFinite()) {
    throw DataError("episode contains non-finite values");
  }
}

Transition Episode::transition(int i) const {
  return {state(i), action(i), state(i + 1)};
}

bool Episode::operator==(const Episode& other) const {
  return source_ == other.source_ && states_.rows() == other.states_.rows() &&
         states_.cols() == other.states_.cols() &&
         actions_.rows() == other.actions_.rows() &&
         actions_.cols() == other.actions_.cols() && states_ == other.states_ &&
         actions_ == other.actions_;
}

std::vector<std::string> Dataset::Provenance() const {
  std::vector<std::string> names;
  for (const auto& e : episodes) {
    if (std::find(names.begin(), names.end(), e.source()) == names.end()) {
      names.push_back(e.source());
    }
  }
  return names;
}

void Dataset::Validate() const {
  system.Validate();
  for (size_t i = 0; i < episodes.size(); ++i) {
    if (episodes[i].state_dim() != system.state_dim ||
        episodes[i].action_dim() != system.action_dim) {
      throw DataError("episode " + std::to_string(i) +
                      " does not match the system dimensions");
    }
  }
}

bool Dataset::operator==(const Dataset& other) const {
  return system.name == other.system.name &&
         system.state_dim == other.system.state_dim &&
         system.action_dim == other.system.action_dim &&
         system.pos_dim == other.system.pos_dim && system.dt == other.system.dt &&
         system.action_low == other.system.action_low &&
         system.action_high == other.system.action_high &&
         system.params == other.system.params &&
         system.wrap_positions == other.system.wrap_positions &&
         episodes == other.episodes;
}

Dataset GenerateDataset(const SystemSpec& spec,
                        const std::vector<std::string>& behavior_mix,
                        int n_episodes, int max_len, std::uint64_t seed) {
  spec.Validate();
  if (n_episodes < 1) throw ConfigError("n_episodes must be >= 1");
  if (max_len < 2) throw ConfigError("max_len must be >= 2");
  if (behavior_mix.empty()) throw ConfigError("behavior mix is empty");
  for (const auto& name : behavior_mix) {
    if (std::find(std::begin(kBehaviorPolicies), std::end(kBehaviorPolicies),
                  name) == std::end(kBehaviorPolicies)) {
      throw ConfigError("unknown behavior policy '" + name + "'");
    }
  }

  Dataset dataset;
  dataset.system = spec;
  dataset.episodes.reserve(n_episodes);
  for (int e = 0; e < n_episodes; ++e) {
    Rng rng = MakeRng(seed, static_cast<std::uint64_t>(e));
    const std::string& name = behavior_mix[e % behavior_mix.size()];
    BehaviorPolicy policy(name, spec, rng);

    Eigen::MatrixXd states(spec.state_dim, max_len + 1);
    Eigen::MatrixXd actions(spec.action_dim, max_len);
    states.col(0) = InitialState(spec, rng);
    for (int t = 0; t < max_len; ++t) {
      actions.col(t) = policy.Act(t, rng);
      states.col(t + 1) = StepSystem(states.col(t), actions.col(t), spec);
    }
    dataset.episodes.emplace_back(std::move(states), std::move(actions), name);
  }
  return dataset;
}

Dataset FilterEpisodes(const Dataset& dataset, int min_len) {
  if (min_len < 1) throw ConfigError("min_len must be >= 1");
  Dataset out;
  out.system = dataset.system;
  for (const auto& e : dataset.episodes) {
    if (e.length() >= min_len) out.episodes.push_back(e);
  }
  if (out.episodes.empty()) {
    throw EmptyDatasetError("no episode has length >= " +
                            std::to_string(min_len));
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> SplitState(
    const SystemSpec& spec, const Eigen::VectorXd& state) {
  if (state.size() != spec.state_dim) {
    throw DataError("state dimension mismatch in SplitState");
  }
  return {state.head(spec.pos_dim), state.tail(spec.state_dim - spec.pos_dim)};
}

Eigen::VectorXd JoinState(const Eigen::VectorXd& qpos,
                          const Eigen::VectorXd& qvel) {
  Eigen::VectorXd s(qpos.size() + qvel.size());
  s << qpos, qvel;
  return s;
}

Eigen::VectorXd PositionDelta(const SystemSpec& spec,
                              const Eigen::VectorXd& current,
                              const Eigen::VectorXd& next) {
  Eigen::VectorXd delta = next.head(spec.pos_dim) - current.head(spec.pos_dim);
  if (spec.wrap_positions) {
    for (int i = 0; i < delta.size(); ++i) delta[i] = WrapAngle(delta[i]);
  }
  return delta;
}

Eigen::VectorXd Scaler::Scale(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(x.size());
  for (int i = 0; i < x.size(); ++i) out[i] = Scale(i, x[i]);
  return out;
}

double Scaler::Scale(int i, double x) const {
  double range = max[i] - min[i];
  return range > 0.0 ? (x - min[i]) / range : 0.0;
}

Scaler MinMaxStats(const Dataset& dataset) {
  if (dataset.episodes.empty()) throw EmptyDatasetError("dataset is empty");
  const int sd = dataset.system.state_dim;
  const int ad = dataset.system.action_dim;
  Scaler scaler;
  scaler.min = Eigen::VectorXd::Constant(sd + ad,
                                         std::numeric_limits<double>::infinity());
  scaler.max = -scaler.min;
  for (const auto& e : dataset.episodes) {
    scaler.min.head(sd) = scaler.min.head(sd).cwiseMin(e.states().rowwise().minCoeff());
    scaler.max.head(sd) = scaler.max.head(sd).cwiseMax(e.states().rowwise().maxCoeff());
    scaler.min.tail(ad) = scaler.min.tail(ad).cwiseMin(e.actions().rowwise().minCoeff());
    scaler.max.tail(ad) = scaler.max.tail(ad).cwiseMax(e.actions().rowwise().maxCoeff());
  }
  return scaler;
}

}  // namespace fwdlearn
