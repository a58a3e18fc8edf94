// Copyright 2026 The SRFM Bench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srfm/policy.hpp"
#include "srfm/sim.hpp"

namespace srfm {

struct GoalSeekConfig {
  double turn_gain = 2.0;  ///< w = turn_gain * goal_angle before clamping

  friend bool operator==(const GoalSeekConfig&, const GoalSeekConfig&) = default;
};

struct DwaConfig {
  double max_accel = 1.0;          ///< m/s^2
  double max_angular_accel = 6.0;  ///< rad/s^2
  int v_samples = 7;
  int w_samples = 15;
  double horizon = 1.5;            ///< rollout length (s)
  double rollout_step = 0.1;       ///< rollout integration step (s)
  double heading_weight = 1.0;
  double clearance_weight = 1.0;
  double speed_weight = 0.4;
  double clearance_cap = 2.0;      ///< clearance beyond this scores the same
  double safety_margin = 0.8;      ///< added to the collision distance
  double detection_range = 2.0;

  friend bool operator==(const DwaConfig&, const DwaConfig&) = default;
};

struct VoConfig {
  double detection_range = 1.4;
  double time_horizon = 5.0;       ///< collisions later than this are ignored (s)
  int speed_samples = 6;
  int heading_samples = 36;
  double turn_gain = 2.0;
  double safety_margin = 0.6;      ///< cone radius is collision distance plus this

  friend bool operator==(const VoConfig&, const VoConfig&) = default;
};

struct PolicyConfigs {
  GoalSeekConfig goal_seek;
  DwaConfig dwa;
  VoConfig vo;
  double transport_timeout = 5.0;  ///< seconds per step for external policies

  friend bool operator==(const PolicyConfigs&, const PolicyConfigs&) = default;
};

namespace policies {

/// A pedestrian position and velocity estimate in the current robot frame.
struct Track {
  Vec2 position;
  Vec2 velocity;
  bool has_velocity = false;
};

/// Recovers pedestrian velocities from consecutive observations. Previous
/// detections are moved into the current robot frame using the last action
/// (dead reckoning), matched greedily to the nearest current detection, and
/// finite-differenced.
class PedestrianTracker {
 public:
  explicit PedestrianTracker(double dt, double gate = 0.6) : dt_(dt), gate_(gate) {}

  void reset() { previous_.clear(); }
  std::vector<Track> update(const Observation& obs);

 private:
  double dt_;
  double gate_;
  std::vector<Vec2> previous_;
};

/// Goal pursuit that ignores pedestrians.
class GoalSeekPolicy final : public Policy {
 public:
  explicit GoalSeekPolicy(GoalSeekConfig config = {}) : config_(config) {}
  [[nodiscard]] std::string name() const override { return "goal_seek"; }
  Action act(const Observation& obs, const StepFeedback& feedback) override;

 private:
  GoalSeekConfig config_;
};

/// Always commands (0, 0).
class StandStillPolicy final : public Policy {
 public:
  [[nodiscard]] std::string name() const override { return "stand_still"; }
  Action act(const Observation&, const StepFeedback&) override { return {}; }
};

/// Replays a recorded action log; stands still once the log is exhausted.
class ReplayPolicy final : public Policy {
 public:
  explicit ReplayPolicy(std::vector<ActionSample> actions) : actions_(std::move(actions)) {}
  [[nodiscard]] std::string name() const override { return "replay"; }
  void reset(const EpisodeInfo&) override { next_ = 0; }
  Action act(const Observation&, const StepFeedback&) override;

 private:
  std::vector<ActionSample> actions_;
  std::size_t next_ = 0;
};

/// Dynamic window approach over constant-velocity pedestrian predictions.
class DwaPolicy final : public Policy {
 public:
  DwaPolicy(DwaConfig config, PolicyContext context);
  [[nodiscard]] std::string name() const override { return "dwa"; }
  void reset(const EpisodeInfo&) override { tracker_.reset(); }
  Action act(const Observation& obs, const StepFeedback& feedback) override;

  /// Decision for a given set of pedestrian tracks; exposed for tests.
  struct Choice {
    Action action;
    double clearance = 0.0;  ///< minimum rollout clearance of the choice
    bool admissible = false;
  };
  [[nodiscard]] Choice choose(const Observation& obs, const std::vector<Track>& tracks) const;

 private:
  DwaConfig config_;
  PolicyContext context_;
  PedestrianTracker tracker_;
};

/// A velocity obstacle: robot velocities whose motion relative to the
/// pedestrian reaches the inflated disc within the horizon.
struct VelocityObstacle {
  Vec2 position;   ///< pedestrian relative to the robot
  Vec2 velocity;   ///< pedestrian velocity
  double radius = 0.0;
};

/// True when `u` lies in the cone (truncated at `horizon` seconds).
bool in_velocity_obstacle(Vec2 u, const VelocityObstacle& vo, double horizon);

class VoPolicy final : public Policy {
 public:
  VoPolicy(VoConfig config, PolicyContext context);
  [[nodiscard]] std::string name() const override { return "vo"; }
  void reset(const EpisodeInfo&) override {
    tracker_.reset();
    last_velocity_.reset();
  }
  Action act(const Observation& obs, const StepFeedback& feedback) override;

  /// Cones built from the tracks within detection range.
  [[nodiscard]] std::vector<VelocityObstacle> obstacles(const std::vector<Track>& tracks) const;
  /// Admissible velocity closest to the goal-directed preference, or nullopt.
  [[nodiscard]] std::optional<Vec2> select_velocity(const Observation& obs,
                                                    const std::vector<VelocityObstacle>& cones) const;
  /// Converts a planar velocity to a unicycle command.
  [[nodiscard]] Action to_command(Vec2 u) const;
  [[nodiscard]] const std::optional<Vec2>& last_velocity() const { return last_velocity_; }

 private:
  VoConfig config_;
  PolicyContext context_;
  PedestrianTracker tracker_;
  std::optional<Vec2> last_velocity_;
};

/// Builds a policy from its command-line spec: goal_seek, stand_still, dwa,
/// vo, or external:<endpoint> (see transport.hpp for endpoint syntax).
std::unique_ptr<Policy> make_policy(const std::string& spec, const PolicyContext& context,
                                    const PolicyConfigs& configs = {});

}  // namespace policies
}  // namespace srfm
