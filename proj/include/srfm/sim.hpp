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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srfm/core.hpp"
#include "srfm/forces.hpp"
#include "srfm/policy.hpp"
#include "srfm/reward.hpp"
#include "srfm/scenarios.hpp"

namespace srfm {

struct SimConfig {
  double dt = 0.1;
  int max_steps = 750;
  double speed_cap = 1.3;            ///< pedestrian speed limit (m/s)
  double goal_radius = 0.5;
  double collision_distance = 0.6;   ///< robot-pedestrian center distance
  double social_zone_radius = 2.0;   ///< observation range
  ActionBounds robot_bounds;
  SrfmParams params;
  bool robot_force_enabled = true;
  /// Honor the scenario's goal reassignment; false forces fixed goals.
  bool reassign_goals = true;
  RewardConfig reward;
  ScenarioConstants scenario_constants;

  [[nodiscard]] PolicyContext policy_context() const {
    return {dt, collision_distance, social_zone_radius, robot_bounds};
  }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Throws srfm::Error for out-of-range settings.
void validate(const SimConfig& config);

enum class EventKind { goal_reached, goal_reassigned, collision, robot_success, timeout };

std::string to_string(EventKind kind);
EventKind parse_event_kind(std::string_view name);

struct Event {
  double t = 0.0;
  EventKind kind = EventKind::timeout;
  int agent_id = -1;

  friend bool operator==(const Event&, const Event&) = default;
};

struct ActionSample {
  double t = 0.0;  ///< time the command was issued
  double v = 0.0;
  double w = 0.0;

  friend bool operator==(const ActionSample&, const ActionSample&) = default;
};

/// Every agent's state at one instant of the fixed time grid.
struct Frame {
  int step = 0;
  double t = 0.0;
  std::optional<AgentState> robot;
  std::vector<AgentState> pedestrians;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct EpisodeRecord {
  static constexpr int kFormatVersion = 1;

  SimConfig config;
  Scenario scenario;
  std::uint64_t seed = 0;
  std::vector<Frame> frames;
  std::vector<ActionSample> actions;
  std::vector<Event> events;
  Outcome outcome = Outcome::timeout;

  [[nodiscard]] std::size_t steps() const { return frames.empty() ? 0 : frames.size() - 1; }
  [[nodiscard]] double end_time() const { return frames.empty() ? 0.0 : frames.back().t; }
  [[nodiscard]] std::size_t pedestrian_count() const {
    return frames.empty() ? 0 : frames.front().pedestrians.size();
  }

  /// Full trajectory of the i-th pedestrian. goal_reached_at is the start of
  /// the final stay inside the goal zone (empty if it ends outside).
  [[nodiscard]] Trajectory pedestrian_trajectory(std::size_t index) const;
  [[nodiscard]] std::vector<Trajectory> pedestrian_trajectories() const;
  /// Empty when the robot was removed from the scene.
  [[nodiscard]] Trajectory robot_trajectory() const;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct EpisodeOptions {
  /// False removes the robot from the scene entirely.
  bool robot_present = true;
  /// Run exactly this many steps; terminal checks only on the last one.
  std::optional<int> fixed_steps;
};

namespace sim {

/// Ids of the pedestrians of `scenario`, in order: 1..n. The robot is 0.
inline constexpr int kRobotId = 0;

/// One synchronous semi-implicit Euler step for every pedestrian, computed
/// from the given snapshot. Velocities are clamped to config.speed_cap.
std::vector<AgentState> step_pedestrians(std::span<const AgentState> states, const AgentState* robot,
                                         std::span<const Obstacle> obstacles, const SimConfig& config);

/// Unicycle update: heading first, then translation along the new heading.
/// The action is clamped to config.robot_bounds.
AgentState step_robot(const AgentState& robot, Action action, const SimConfig& config);

/// Initial robot and pedestrian states for a scenario.
AgentState initial_robot(const Scenario& scenario);
std::vector<AgentState> initial_pedestrians(const Scenario& scenario);

/// Incremental episode driver. run_episode and the `serve` endpoint both
/// step through this.
class Episode {
 public:
  Episode(const Scenario& scenario, const SimConfig& config, const RngStream& rng, EpisodeOptions options = {});

  [[nodiscard]] const Observation& observation() const { return observation_; }
  [[nodiscard]] bool done() const { return done_; }
  [[nodiscard]] int step_index() const { return step_; }
  [[nodiscard]] const EpisodeRecord& record() const { return record_; }
  [[nodiscard]] const StepFeedback& last_feedback() const { return feedback_; }

  /// Applies one robot command and advances every agent by dt.
  const StepFeedback& step(Action action);

  EpisodeRecord take_record() { return std::move(record_); }

 private:
  void check_terminal();
  void refresh_observation();
  void finish(Outcome outcome, int agent_id = -1);

  SimConfig config_;
  EpisodeOptions options_;
  Scenario scenario_;
  bool reassign_;
  std::vector<RngStream> goal_rngs_;
  std::vector<double> cruise_speed_;
  std::vector<bool> holding_;
  std::vector<bool> inside_goal_;
  AgentState robot_;
  std::vector<AgentState> pedestrians_;
  Action last_action_;
  double start_goal_distance_ = 0.0;
  int step_ = 0;
  bool done_ = false;
  std::optional<Outcome> outcome_;
  Observation observation_;
  StepFeedback feedback_;
  EpisodeRecord record_;
};

/// Runs a complete episode. Identical inputs give bit-identical records.
/// PolicyTransportError from the policy propagates; no partial record is
/// returned.
EpisodeRecord run_episode(const Scenario& scenario, Policy& policy, const SimConfig& config, const RngStream& rng,
                          EpisodeOptions options = {});

}  // namespace sim
}  // namespace srfm
