#ifndef FWDLEARN_DYNSYS_H_
#define FWDLEARN_DYNSYS_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fwdlearn {

// Reference system description. States are laid out as [qpos..., qvel...]
// with pos_dim position entries followed by pos_dim velocity entries.
struct SystemSpec {
  std::string name;
  int state_dim = 0;
  int action_dim = 0;
  int pos_dim = 0;
  double dt = 0.0;
  Eigen::VectorXd action_low;
  Eigen::VectorXd action_high;
  std::map<std::string, double> params;
  // positions are angles stored in (-pi, pi]
  bool wrap_positions = false;

  // throws ConfigError when an invariant does not hold
  void Validate() const;
  double Param(const std::string& key, double fallback) const;
};

SystemSpec PendulumSpec(double dt = 0.05);
SystemSpec MassSpringDamperSpec(double dt = 0.05);

// "pendulum" or "msd"; throws ConfigError otherwise
SystemSpec MakeSystemSpec(std::string_view name, double dt = 0.05);

// wraps to (-pi, pi]
double WrapAngle(double angle);

// semi-implicit Euler pendulum, state (theta, omega), action torque
Eigen::VectorXd StepPendulum(const Eigen::VectorXd& state,
                             const Eigen::VectorXd& action,
                             const SystemSpec& spec);

// semi-implicit Euler mass-spring-damper, state (x, v), action force
Eigen::VectorXd StepMassSpringDamper(const Eigen::VectorXd& state,
                                     const Eigen::VectorXd& action,
                                     const SystemSpec& spec);

// dispatches on spec.name
Eigen::VectorXd StepSystem(const Eigen::VectorXd& state,
                           const Eigen::VectorXd& action,
                           const SystemSpec& spec);

// total mechanical energy of a pendulum state
double PendulumEnergy(const Eigen::VectorXd& state, const SystemSpec& spec);

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  Eigen::VectorXd next_state;
};

// One trajectory. Stored as length+1 states (columns) and length actions,
// so consecutive transitions chain by construction.
class Episode {
 public:
  Episode() = default;
  Episode(Eigen::MatrixXd states, Eigen::MatrixXd actions, std::string source);

  int length() const { return static_cast<int>(actions_.cols()); }
  int state_dim() const { return static_cast<int>(states_.rows()); }
  int action_dim() const { return static_cast<int>(actions_.rows()); }

  Eigen::VectorXd state(int t) const { return states_.col(t); }
  Eigen::VectorXd action(int t) const { return actions_.col(t); }
  Transition transition(int i) const;

  const Eigen::MatrixXd& states() const { return states_; }
  const Eigen::MatrixXd& actions() const { return actions_; }
  // behavior policy that produced the episode
  const std::string& source() const { return source_; }

  bool operator==(const Episode& other) const;

 private:
  Eigen::MatrixXd states_;   // state_dim x (length + 1)
  Eigen::MatrixXd actions_;  // action_dim x length
  std::string source_;
};

struct Dataset {
  SystemSpec system;
  std::vector<Episode> episodes;

  // distinct behavior policy names in order of first appearance
  std::vector<std::string> Provenance() const;
  // throws DataError when an episode does not match the system dimensions
  void Validate() const;
  bool operator==(const Dataset& other) const;
};

// behavior policies understood by GenerateDataset
inline constexpr std::string_view kBehaviorPolicies[] = {"random", "sinusoid",
                                                         "bang_bang"};

// Episodes are assigned behavior policies round-robin from behavior_mix and
// each draws from its own seed-derived stream. Every episode has max_len
// transitions.
Dataset GenerateDataset(const SystemSpec& spec,
                        const std::vector<std::string>& behavior_mix,
                        int n_episodes, int max_len, std::uint64_t seed);

// keeps episodes with length >= min_len, in order
Dataset FilterEpisodes(const Dataset& dataset, int min_len);

// splits a state into (qpos, qvel)
std::pair<Eigen::VectorXd, Eigen::VectorXd> SplitState(
    const SystemSpec& spec, const Eigen::VectorXd& state);
Eigen::VectorXd JoinState(const Eigen::VectorXd& qpos,
                          const Eigen::VectorXd& qvel);

// qpos(next) - qpos(current), wrapped for angular systems
Eigen::VectorXd PositionDelta(const SystemSpec& spec,
                              const Eigen::VectorXd& current,
                              const Eigen::VectorXd& next);

// Min-max scaling of (state, action) frames.
struct Scaler {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  int dim() const { return static_cast<int>(min.size()); }
  // (x - min) / (max - min), 0 where max == min
  Eigen::VectorXd Scale(const Eigen::VectorXd& x) const;
  double Scale(int i, double x) const;

  bool operator==(const Scaler& other) const {
    return min == other.min && max == other.max;
  }
};

// per-dimension range over every state and action of the dataset
Scaler MinMaxStats(const Dataset& dataset);

}  // namespace fwdlearn

#endif  // FWDLEARN_DYNSYS_H_
