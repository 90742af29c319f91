#ifndef IRGAIL_ROBOT_FAMILY_H_
#define IRGAIL_ROBOT_FAMILY_H_

// Parametric robot families. A robot is identified by its family and a
// physical configuration vector drawn from the family's configuration space;
// all robots of a family share state and action dimensions but differ in
// dynamics and, for keypoint observations, in what a given pose looks like.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace irgail {

enum class Family { kPendulum, kCartPole, kTwoLinkArm };
enum class ObsMode { kKeypoint, kAngle };

std::string ToString(Family family);
std::string ToString(ObsMode mode);
Family ParseFamily(std::string_view name);
ObsMode ParseObsMode(std::string_view name);

// Axis-aligned box of admissible configuration vectors.
struct ConfigSpace {
  std::vector<double> lower;
  std::vector<double> upper;

  size_t dim() const { return lower.size(); }
  bool Contains(std::span<const double> point) const;
  // Throws std::invalid_argument on mismatched or inverted bounds.
  void Validate() const;
};

struct BallRegion {
  std::vector<double> center;
  double radius = 0.0;

  bool Contains(std::span<const double> point) const;
  // True when every point of the ball lies in `space` (strict: with margin).
  bool InsideOf(const ConfigSpace& space, bool strict = false) const;
};

struct RobotConfig {
  Family family = Family::kPendulum;
  // Pendulum: [link length, max gear]; CartPole: [pole length, max gear];
  // TwoLinkArm: [link1 length, link2 length].
  std::vector<double> params;
  ObsMode obs_mode = ObsMode::kKeypoint;

  bool operator==(const RobotConfig&) const = default;
  RobotConfig WithObsMode(ObsMode mode) const;
};

struct EnvSettings {
  double dt = 0.02;
  int horizon = 200;
  double reset_noise = 0.05;
};

// Generalized coordinates followed by their velocities.
//   Pendulum:   (theta, theta_dot)
//   CartPole:   (x, theta, x_dot, theta_dot)
//   TwoLinkArm: (theta1, theta2, theta1_dot, theta2_dot)
// Angles are measured from the upright pose (pendulum, pole) or from the
// x axis (arm).
struct EnvState {
  std::vector<double> q;
  int step_index = 0;

  bool operator==(const EnvState&) const = default;
};

struct StepOutcome {
  EnvState state;
  double reward = 0.0;
  bool terminated = false;  // failure condition reached
  bool truncated = false;   // horizon reached

  bool done() const { return terminated || truncated; }
};

ConfigSpace DefaultConfigSpace(Family family);
size_t ConfigDim(Family family);
size_t StateDim(Family family);
size_t ActionDim(Family family);
size_t ObservationDim(Family family, ObsMode mode);

// Checks dimension and finiteness/positivity of the parameters.
void ValidateConfig(const RobotConfig& config);

// Rejection-samples a configuration inside `space`, inside `region` when
// given and outside `exclude` when given. Deterministic per seed. Throws
// std::runtime_error when the admissible set is (nearly) empty.
RobotConfig SampleConfig(Family family, ObsMode obs_mode,
                         const ConfigSpace& space,
                         const std::optional<BallRegion>& region,
                         const std::optional<BallRegion>& exclude,
                         uint64_t seed);

// One robot instance. Stateless: every method is a pure function of its
// arguments, so an env may be shared by concurrent workers.
class RobotEnv {
 public:
  explicit RobotEnv(RobotConfig config, EnvSettings settings = {});

  const RobotConfig& config() const { return config_; }
  const EnvSettings& settings() const { return settings_; }
  size_t observation_dim() const;
  size_t action_dim() const;

  // Start pose plus uniform noise of amplitude settings().reset_noise.
  EnvState Reset(uint64_t seed) const;

  // Semi-implicit Euler step. `action` components must lie in [-1, 1]; the
  // applied torque/force is action times the gear. Throws NumericalError on a
  // non-finite input state. Stepping past a terminal state is allowed.
  StepOutcome Step(const EnvState& state, std::span<const double> action) const;

  std::vector<double> Observe(const EnvState& state) const;
  std::vector<double> ObserveAs(const EnvState& state, ObsMode mode) const;

  // Mechanical energy of the unforced pendulum (pendulum family only).
  double PendulumEnergy(const EnvState& state) const;

  // End-effector target of the arm family, in world coordinates.
  std::vector<double> ArmTarget() const;

 private:
  RobotConfig config_;
  EnvSettings settings_;
};

// Inverts an observation back to joint angles (pendulum: {theta};
// cart-pole: {theta}; arm: {theta1, theta2}). Works for both modes.
std::vector<double> RecoverJointAngles(const RobotConfig& config,
                                       std::span<const double> observation);

}  // namespace irgail

#endif  // IRGAIL_ROBOT_FAMILY_H_
