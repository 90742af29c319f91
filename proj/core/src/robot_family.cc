#include "irgail/robot_family.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "irgail/errors.h"
#include "irgail/random.h"

namespace irgail {
namespace {

constexpr double kGravity = 9.81;

// pendulum
constexpr double kPendulumMass = 1.0;
constexpr double kPendulumTorque = 20.0;  // N*m at gear multiplier 1
constexpr double kPendulumFallAngle = 0.2;

// cart-pole
constexpr double kCartMass = 1.0;
constexpr double kPoleMass = 0.1;
constexpr double kCartForce = 10.0;  // N at gear multiplier 1
constexpr double kPoleFallAngle = 0.2;
constexpr double kCartLimit = 2.4;

// two-link arm, uniform rods moving in the horizontal plane
constexpr double kLinkMass = 1.0;
constexpr double kArmTorque = 5.0;
constexpr double kArmDamping = 1.0;
constexpr double kArmTargetReach = 0.7;  // fraction of L1 + L2
constexpr double kArmTargetAngle = std::numbers::pi / 3.0;

constexpr int kMaxRejectionAttempts = 100000;

void RequireFinite(const EnvState& state) {
  for (double v : state.q) {
    if (!std::isfinite(v)) {
      throw NumericalError("non-finite environment state");
    }
  }
}

}  // namespace

std::string ToString(Family family) {
  switch (family) {
    case Family::kPendulum:
      return "pendulum";
    case Family::kCartPole:
      return "cartpole";
    case Family::kTwoLinkArm:
      return "two_link_arm";
  }
  return "unknown";
}

std::string ToString(ObsMode mode) {
  return mode == ObsMode::kKeypoint ? "keypoint" : "angle";
}

Family ParseFamily(std::string_view name) {
  if (name == "pendulum") return Family::kPendulum;
  if (name == "cartpole") return Family::kCartPole;
  if (name == "two_link_arm") return Family::kTwoLinkArm;
  throw std::invalid_argument("unknown robot family '" + std::string(name) +
                              "'");
}

ObsMode ParseObsMode(std::string_view name) {
  if (name == "keypoint") return ObsMode::kKeypoint;
  if (name == "angle") return ObsMode::kAngle;
  throw std::invalid_argument("unknown observation mode '" +
                              std::string(name) + "'");
}

bool ConfigSpace::Contains(std::span<const double> point) const {
  if (point.size() != dim()) return false;
  for (size_t i = 0; i < dim(); ++i) {
    if (point[i] < lower[i] || point[i] > upper[i]) return false;
  }
  return true;
}

void ConfigSpace::Validate() const {
  if (lower.empty() || lower.size() != upper.size()) {
    throw std::invalid_argument("config space bounds must be non-empty and "
                                "of equal length");
  }
  for (size_t i = 0; i < dim(); ++i) {
    if (!(lower[i] <= upper[i])) {
      throw std::invalid_argument("config space lower bound exceeds upper "
                                  "bound in dimension " + std::to_string(i));
    }
  }
}

bool BallRegion::Contains(std::span<const double> point) const {
  if (point.size() != center.size()) return false;
  double sq = 0.0;
  for (size_t i = 0; i < center.size(); ++i) {
    const double d = point[i] - center[i];
    sq += d * d;
  }
  return std::sqrt(sq) <= radius;
}

bool BallRegion::InsideOf(const ConfigSpace& space, bool strict) const {
  if (center.size() != space.dim() || radius < 0.0) return false;
  for (size_t i = 0; i < center.size(); ++i) {
    const double lo = center[i] - radius;
    const double hi = center[i] + radius;
    if (strict ? (lo <= space.lower[i] || hi >= space.upper[i])
               : (lo < space.lower[i] || hi > space.upper[i])) {
      return false;
    }
  }
  return true;
}

RobotConfig RobotConfig::WithObsMode(ObsMode mode) const {
  RobotConfig out = *this;
  out.obs_mode = mode;
  return out;
}

ConfigSpace DefaultConfigSpace(Family family) {
  switch (family) {
    case Family::kPendulum:
    case Family::kCartPole:
      return {{0.75, 0.5}, {5.0, 2.0}};
    case Family::kTwoLinkArm:
      return {{0.5, 0.5}, {2.0, 2.0}};
  }
  throw std::invalid_argument("unknown family");
}

size_t ConfigDim(Family) { return 2; }

size_t StateDim(Family family) {
  return family == Family::kPendulum ? 2 : 4;
}

size_t ActionDim(Family family) {
  return family == Family::kTwoLinkArm ? 2 : 1;
}

size_t ObservationDim(Family family, ObsMode mode) {
  switch (family) {
    case Family::kPendulum:
      return mode == ObsMode::kKeypoint ? 4 : 2;
    case Family::kCartPole:
      return mode == ObsMode::kKeypoint ? 6 : 4;
    case Family::kTwoLinkArm:
      return mode == ObsMode::kKeypoint ? 8 : 4;
  }
  return 0;
}

void ValidateConfig(const RobotConfig& config) {
  if (config.params.size() != ConfigDim(config.family)) {
    throw std::invalid_argument(
        ToString(config.family) + " expects " +
        std::to_string(ConfigDim(config.family)) + " config parameters, got " +
        std::to_string(config.params.size()));
  }
  for (double p : config.params) {
    if (!std::isfinite(p) || p <= 0.0) {
      throw std::invalid_argument("config parameters must be positive and "
                                  "finite");
    }
  }
}

RobotConfig SampleConfig(Family family, ObsMode obs_mode,
                         const ConfigSpace& space,
                         const std::optional<BallRegion>& region,
                         const std::optional<BallRegion>& exclude,
                         uint64_t seed) {
  space.Validate();
  if (space.dim() != ConfigDim(family)) {
    throw std::invalid_argument("config space dimension does not match the "
                                "family");
  }
  if (region && !region->InsideOf(space)) {
    throw std::invalid_argument("sampling region is not inside the config "
                                "space");
  }
  Rng rng(seed);
  const size_t dim = space.dim();
  std::vector<double> point(dim);
  for (int attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
    if (region) {
      // uniform in the ball: gaussian direction, radius ~ r * u^(1/d)
      std::vector<double> dir = rng.NormalVector(dim);
      double norm = 0.0;
      for (double d : dir) norm += d * d;
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      const double r = region->radius *
                       std::pow(rng.Uniform(0.0, 1.0), 1.0 / dim);
      for (size_t i = 0; i < dim; ++i) {
        point[i] = region->center[i] + r * dir[i] / norm;
      }
      if (!region->Contains(point)) continue;
    } else {
      for (size_t i = 0; i < dim; ++i) {
        point[i] = rng.Uniform(space.lower[i], space.upper[i]);
      }
    }
    if (!space.Contains(point)) continue;
    if (exclude && exclude->Contains(point)) continue;
    return RobotConfig{family, point, obs_mode};
  }
  throw std::runtime_error("config sampling exceeded " +
                           std::to_string(kMaxRejectionAttempts) +
                           " attempts; the requested split is infeasible");
}

RobotEnv::RobotEnv(RobotConfig config, EnvSettings settings)
    : config_(std::move(config)), settings_(settings) {
  ValidateConfig(config_);
  if (!(settings_.dt > 0.0) || settings_.horizon < 1 ||
      settings_.reset_noise < 0.0) {
    throw std::invalid_argument("invalid environment settings");
  }
}

size_t RobotEnv::observation_dim() const {
  return ObservationDim(config_.family, config_.obs_mode);
}

size_t RobotEnv::action_dim() const { return ActionDim(config_.family); }

EnvState RobotEnv::Reset(uint64_t seed) const {
  Rng rng(seed);
  EnvState state;
  state.q.assign(StateDim(config_.family), 0.0);
  const double noise = settings_.reset_noise;
  for (double& v : state.q) {
    v = noise > 0.0 ? rng.Uniform(-noise, noise) : 0.0;
  }
  return state;
}

StepOutcome RobotEnv::Step(const EnvState& state,
                           std::span<const double> action) const {
  RequireFinite(state);
  if (state.q.size() != StateDim(config_.family)) {
    throw std::invalid_argument("state dimension does not match the family");
  }
  if (action.size() != action_dim()) {
    throw std::invalid_argument("action dimension does not match the family");
  }
  for (double u : action) {
    if (!(u >= -1.0 - 1e-12 && u <= 1.0 + 1e-12)) {
      throw std::invalid_argument("action components must lie in [-1, 1]");
    }
  }

  const double dt = settings_.dt;
  StepOutcome out;
  out.state.q = state.q;
  out.state.step_index = state.step_index + 1;
  std::vector<double>& q = out.state.q;

  switch (config_.family) {
    case Family::kPendulum: {
      const double length = config_.params[0];
      const double gear = config_.params[1] * kPendulumTorque;
      const double accel =
          kGravity / length * std::sin(q[0]) +
          gear * action[0] / (kPendulumMass * length * length);
      q[1] += dt * accel;
      q[0] += dt * q[1];
      out.reward = 1.0;
      out.terminated = std::abs(q[0]) > kPendulumFallAngle;
      break;
    }
    case Family::kCartPole: {
      const double half = 0.5 * config_.params[0];
      const double force = config_.params[1] * kCartForce * action[0];
      const double total = kCartMass + kPoleMass;
      const double sin_t = std::sin(q[1]);
      const double cos_t = std::cos(q[1]);
      const double temp =
          (force + kPoleMass * half * q[3] * q[3] * sin_t) / total;
      const double theta_acc =
          (kGravity * sin_t - cos_t * temp) /
          (half * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total));
      const double x_acc = temp - kPoleMass * half * theta_acc * cos_t / total;
      q[2] += dt * x_acc;
      q[0] += dt * q[2];
      q[3] += dt * theta_acc;
      q[1] += dt * q[3];
      out.reward = 1.0;
      out.terminated =
          std::abs(q[1]) > kPoleFallAngle || std::abs(q[0]) > kCartLimit;
      break;
    }
    case Family::kTwoLinkArm: {
      const double l1 = config_.params[0];
      const double l2 = config_.params[1];
      const double c1 = 0.5 * l1;
      const double c2 = 0.5 * l2;
      const double i1 = kLinkMass * l1 * l1 / 12.0;
      const double i2 = kLinkMass * l2 * l2 / 12.0;
      const double cos2 = std::cos(q[1]);
      const double h = kLinkMass * l1 * c2 * std::sin(q[1]);
      const double m11 = i1 + i2 + kLinkMass * c1 * c1 +
                         kLinkMass * (l1 * l1 + c2 * c2 + 2.0 * l1 * c2 * cos2);
      const double m12 = i2 + kLinkMass * (c2 * c2 + l1 * c2 * cos2);
      const double m22 = i2 + kLinkMass * c2 * c2;
      // Coriolis/centrifugal terms plus viscous joint damping.
      const double b1 = kArmTorque * action[0] + h * q[3] * (2.0 * q[2] + q[3]) -
                        kArmDamping * q[2];
      const double b2 =
          kArmTorque * action[1] - h * q[2] * q[2] - kArmDamping * q[3];
      const double det = m11 * m22 - m12 * m12;
      const double acc1 = (m22 * b1 - m12 * b2) / det;
      const double acc2 = (m11 * b2 - m12 * b1) / det;
      q[2] += dt * acc1;
      q[3] += dt * acc2;
      q[0] += dt * q[2];
      q[1] += dt * q[3];
      const double ex = l1 * std::cos(q[0]) + l2 * std::cos(q[0] + q[1]);
      const double ey = l1 * std::sin(q[0]) + l2 * std::sin(q[0] + q[1]);
      const std::vector<double> target = ArmTarget();
      out.reward = -std::hypot(ex - target[0], ey - target[1]);
      out.terminated = false;
      break;
    }
  }
  RequireFinite(out.state);
  out.truncated = out.state.step_index >= settings_.horizon;
  return out;
}

std::vector<double> RobotEnv::Observe(const EnvState& state) const {
  return ObserveAs(state, config_.obs_mode);
}

std::vector<double> RobotEnv::ObserveAs(const EnvState& state,
                                        ObsMode mode) const {
  const std::vector<double>& q = state.q;
  if (mode == ObsMode::kAngle) return q;

  switch (config_.family) {
    case Family::kPendulum: {
      const double l = config_.params[0];
      const double s = std::sin(q[0]);
      const double c = std::cos(q[0]);
      return {l * s, l * c, l * c * q[1], -l * s * q[1]};
    }
    case Family::kCartPole: {
      const double l = config_.params[0];
      const double s = std::sin(q[1]);
      const double c = std::cos(q[1]);
      return {q[0], q[0] + l * s, l * c, q[2], q[2] + l * c * q[3],
              -l * s * q[3]};
    }
    case Family::kTwoLinkArm: {
      const double l1 = config_.params[0];
      const double l2 = config_.params[1];
      const double a = q[0];
      const double b = q[0] + q[1];
      const double da = q[2];
      const double db = q[2] + q[3];
      const double elbow_x = l1 * std::cos(a);
      const double elbow_y = l1 * std::sin(a);
      const double elbow_vx = -l1 * std::sin(a) * da;
      const double elbow_vy = l1 * std::cos(a) * da;
      return {elbow_x,
              elbow_y,
              elbow_x + l2 * std::cos(b),
              elbow_y + l2 * std::sin(b),
              elbow_vx,
              elbow_vy,
              elbow_vx - l2 * std::sin(b) * db,
              elbow_vy + l2 * std::cos(b) * db};
    }
  }
  return {};
}

double RobotEnv::PendulumEnergy(const EnvState& state) const {
  if (config_.family != Family::kPendulum) {
    throw std::invalid_argument("PendulumEnergy requires the pendulum family");
  }
  const double l = config_.params[0];
  const double kinetic = 0.5 * kPendulumMass * l * l * state.q[1] * state.q[1];
  const double potential = kPendulumMass * kGravity * l * std::cos(state.q[0]);
  return kinetic + potential;
}

std::vector<double> RobotEnv::ArmTarget() const {
  if (config_.family != Family::kTwoLinkArm) {
    throw std::invalid_argument("ArmTarget requires the two-link arm family");
  }
  const double reach =
      kArmTargetReach * (config_.params[0] + config_.params[1]);
  return {reach * std::cos(kArmTargetAngle), reach * std::sin(kArmTargetAngle)};
}

std::vector<double> RecoverJointAngles(const RobotConfig& config,
                                       std::span<const double> observation) {
  if (observation.size() != ObservationDim(config.family, config.obs_mode)) {
    throw std::invalid_argument("observation dimension mismatch");
  }
  const bool keypoint = config.obs_mode == ObsMode::kKeypoint;
  switch (config.family) {
    case Family::kPendulum:
      return {keypoint ? std::atan2(observation[0], observation[1])
                       : observation[0]};
    case Family::kCartPole:
      return {keypoint ? std::atan2(observation[1] - observation[0],
                                    observation[2])
                       : observation[1]};
    case Family::kTwoLinkArm: {
      if (!keypoint) return {observation[0], observation[1]};
      const double a = std::atan2(observation[1], observation[0]);
      const double b = std::atan2(observation[3] - observation[1],
                                  observation[2] - observation[0]);
      return {a, std::remainder(b - a, 2.0 * std::numbers::pi)};
    }
  }
  return {};
}

}  // namespace irgail
