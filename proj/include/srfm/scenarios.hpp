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
#include <string>
#include <string_view>
#include <vector>

#include "srfm/core.hpp"
#include "srfm/forces.hpp"

namespace srfm {

enum class ScenarioId { random, footpath, crosswalk, crossfootpath, box, concert };

std::string to_string(ScenarioId id);
/// Accepts the lower-case names ("footpath", ...). Throws srfm::Error.
ScenarioId parse_scenario_id(std::string_view name);

/// The five fixed-goal evaluation scenarios, in their canonical order.
std::vector<ScenarioId> evaluation_scenarios();

struct Bounds {
  Vec2 min;
  Vec2 max;

  [[nodiscard]] bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct PedestrianSpec {
  Vec2 start;
  Vec2 goal;
  double desired_speed = 1.0;

  friend bool operator==(const PedestrianSpec&, const PedestrianSpec&) = default;
};

struct Scenario {
  ScenarioId id = ScenarioId::random;
  Bounds bounds;
  std::vector<PedestrianSpec> pedestrians;
  Vec2 robot_start;
  Vec2 robot_goal;
  double robot_heading = 0.0;
  std::vector<Obstacle> obstacles;
  bool reassign_goals = false;
  std::uint64_t seed = 0;
  double pedestrian_radius = 0.3;
  double robot_radius = 0.3;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Every geometry constant used by the generators. Evaluation layouts are
/// artifact-defined; overriding a value here (or shipping a scenario file)
/// is the supported way to change them.
struct ScenarioConstants {
  double pedestrian_radius = 0.3;
  double robot_radius = 0.3;
  double desired_speed = 1.0;
  double social_zone = 2.0;
  int max_attempts = 10000;

  // Random training area.
  double random_size = 15.0;
  double random_min_robot_separation = 5.0;
  double random_min_goal_distance = 7.0;
  double random_spawn_spacing = 2.0;

  // Footpath and crossfootpath lanes along the x axis.
  double lane_offset = 1.5;
  double lane_jitter = 0.5;
  double lane_start = 6.0;
  double lane_spacing = 1.2;
  Vec2 footpath_robot_start{-6.0, -1.0};
  Vec2 footpath_robot_goal{6.0, 1.0};
  Vec2 crossfootpath_robot_start{0.0, -6.0};
  Vec2 crossfootpath_robot_goal{0.0, 6.0};

  // Crosswalk: perpendicular streams through the origin.
  double crosswalk_lane_offset = 0.6;
  double crosswalk_jitter = 0.3;
  double crosswalk_start = 4.0;
  double crosswalk_spacing = 2.0;
  Vec2 crosswalk_robot_start{-3.0, -3.0};
  Vec2 crosswalk_robot_goal{3.0, 3.0};

  // Box: a ring of pedestrians walking to antipodal points.
  double box_radius = 5.0;
  Vec2 box_robot_goal{6.5, 0.0};

  // Concert: a jittered standing grid.
  double concert_patch = 6.0;
  double concert_jitter = 0.3;
  Vec2 concert_robot_start{-6.0, 0.0};
  Vec2 concert_robot_goal{6.0, 0.0};

  double bounds_margin = 2.0;

  friend bool operator==(const ScenarioConstants&, const ScenarioConstants&) = default;
};

namespace scenarios {

Scenario make_random(std::uint64_t seed, int n_pedestrians = 10, const ScenarioConstants& k = {});
Scenario make_footpath(std::uint64_t seed, int n = 10, const ScenarioConstants& k = {});
Scenario make_crosswalk(std::uint64_t seed, int n = 10, const ScenarioConstants& k = {});
Scenario make_crossfootpath(std::uint64_t seed, int n = 10, const ScenarioConstants& k = {});
Scenario make_box(std::uint64_t seed, int n = 10, const ScenarioConstants& k = {});
Scenario make_concert(std::uint64_t seed, int n = 10, const ScenarioConstants& k = {});

Scenario make(ScenarioId id, std::uint64_t seed, int n = 10, const ScenarioConstants& k = {});

/// New goal for a pedestrian in a reassigning scenario: uniform in bounds, at
/// least random_min_goal_distance from `from` and outside the social zone of
/// the robot goal. Throws srfm::Error after max_attempts rejections.
Vec2 sample_goal(RngStream& rng, const Bounds& bounds, Vec2 from, Vec2 robot_goal,
                 const ScenarioConstants& k = {});

/// Throws srfm::Error when a structural invariant does not hold.
void validate(const Scenario& scenario, const ScenarioConstants& k = {});

}  // namespace scenarios
}  // namespace srfm
