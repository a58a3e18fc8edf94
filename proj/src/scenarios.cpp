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

#include "srfm/scenarios.hpp"

#include <algorithm>
#include <cmath>

namespace srfm {

std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::random: return "random";
    case ScenarioId::footpath: return "footpath";
    case ScenarioId::crosswalk: return "crosswalk";
    case ScenarioId::crossfootpath: return "crossfootpath";
    case ScenarioId::box: return "box";
    case ScenarioId::concert: return "concert";
  }
  return "unknown";
}

ScenarioId parse_scenario_id(std::string_view name) {
  for (ScenarioId id : {ScenarioId::random, ScenarioId::footpath, ScenarioId::crosswalk,
                        ScenarioId::crossfootpath, ScenarioId::box, ScenarioId::concert}) {
    if (to_string(id) == name) return id;
  }
  throw Error("unknown scenario '" + std::string(name) + "'");
}

std::vector<ScenarioId> evaluation_scenarios() {
  return {ScenarioId::footpath, ScenarioId::crosswalk, ScenarioId::crossfootpath, ScenarioId::box,
          ScenarioId::concert};
}

namespace scenarios {
namespace {

void require_count(int n) {
  if (n < 0) throw Error("pedestrian count must be >= 0");
}

Scenario base(ScenarioId id, std::uint64_t seed, const ScenarioConstants& k) {
  Scenario s;
  s.id = id;
  s.seed = seed;
  s.pedestrian_radius = k.pedestrian_radius;
  s.robot_radius = k.robot_radius;
  return s;
}

// Tight box around every start and goal, padded by the margin.
void fit_bounds(Scenario& s, double margin) {
  Vec2 lo = s.robot_start;
  Vec2 hi = s.robot_start;
  auto grow = [&](Vec2 p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  };
  grow(s.robot_goal);
  for (const auto& p : s.pedestrians) {
    grow(p.start);
    grow(p.goal);
  }
  s.bounds = {{lo.x - margin, lo.y - margin}, {hi.x + margin, hi.y + margin}};
}

double face(Vec2 from, Vec2 to) {
  const Vec2 d = to - from;
  return std::atan2(d.y, d.x);
}

Vec2 uniform_in(RngStream& rng, const Bounds& b) {
  const double x = rng.uniform(b.min.x, b.max.x);
  const double y = rng.uniform(b.min.y, b.max.y);
  return {x, y};
}

template <class Accept>
Vec2 rejection_sample(RngStream& rng, const Bounds& b, int max_attempts, const char* what, Accept accept) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const Vec2 p = uniform_in(rng, b);
    if (accept(p)) return p;
  }
  throw Error(std::string("scenario sampling over-constrained: could not place ") + what);
}

// Two opposing lanes along x; shared by footpath and crossfootpath.
void add_lanes(Scenario& s, RngStream& rng, int n, const ScenarioConstants& k) {
  const int rightward = (n + 1) / 2;
  for (int i = 0; i < n; ++i) {
    const bool right = i < rightward;
    const int rank = right ? i : i - rightward;
    const double dir = right ? 1.0 : -1.0;
    const double lane_y = right ? k.lane_offset : -k.lane_offset;
    const double along = k.lane_start + k.lane_spacing * rank;
    const double y0 = lane_y + rng.uniform(-k.lane_jitter, k.lane_jitter);
    const double y1 = lane_y + rng.uniform(-k.lane_jitter, k.lane_jitter);
    s.pedestrians.push_back({{-dir * along, y0}, {dir * along, y1}, k.desired_speed});
  }
}

}  // namespace

Scenario make_random(std::uint64_t seed, int n, const ScenarioConstants& k) {
  require_count(n);
  Scenario s = base(ScenarioId::random, seed, k);
  s.reassign_goals = true;
  const double h = k.random_size / 2.0;
  s.bounds = {{-h, -h}, {h, h}};
  RngStream rng(seed, 0);

  s.robot_start = uniform_in(rng, s.bounds);
  s.robot_goal = rejection_sample(rng, s.bounds, k.max_attempts, "robot goal", [&](Vec2 p) {
    return distance(p, s.robot_start) >= k.random_min_robot_separation;
  });
  s.robot_heading = face(s.robot_start, s.robot_goal);

  for (int i = 0; i < n; ++i) {
    const Vec2 start = rejection_sample(rng, s.bounds, k.max_attempts, "pedestrian start", [&](Vec2 p) {
      if (distance(p, s.robot_start) < k.social_zone) return false;
      return std::all_of(s.pedestrians.begin(), s.pedestrians.end(), [&](const PedestrianSpec& other) {
        return distance(p, other.start) >= k.random_spawn_spacing;
      });
    });
    const Vec2 goal = sample_goal(rng, s.bounds, start, s.robot_goal, k);
    s.pedestrians.push_back({start, goal, k.desired_speed});
  }
  return s;
}

Scenario make_footpath(std::uint64_t seed, int n, const ScenarioConstants& k) {
  require_count(n);
  Scenario s = base(ScenarioId::footpath, seed, k);
  RngStream rng(seed, 0);
  add_lanes(s, rng, n, k);
  s.robot_start = k.footpath_robot_start;
  s.robot_goal = k.footpath_robot_goal;
  s.robot_heading = face(s.robot_start, s.robot_goal);
  fit_bounds(s, k.bounds_margin);
  return s;
}

Scenario make_crossfootpath(std::uint64_t seed, int n, const ScenarioConstants& k) {
  require_count(n);
  Scenario s = base(ScenarioId::crossfootpath, seed, k);
  RngStream rng(seed, 0);
  add_lanes(s, rng, n, k);
  s.robot_start = k.crossfootpath_robot_start;
  s.robot_goal = k.crossfootpath_robot_goal;
  s.robot_heading = face(s.robot_start, s.robot_goal);
  fit_bounds(s, k.bounds_margin);
  return s;
}

Scenario make_crosswalk(std::uint64_t seed, int n, const ScenarioConstants& k) {
  require_count(n);
  Scenario s = base(ScenarioId::crosswalk, seed, k);
  RngStream rng(seed, 0);
  const int along_x = (n + 1) / 2;
  for (int i = 0; i < n; ++i) {
    const bool x_stream = i < along_x;
    const int member = x_stream ? i : i - along_x;
    const double dir = member % 2 == 0 ? 1.0 : -1.0;
    const int rank = member / 2;
    const double reach = k.crosswalk_start + k.crosswalk_spacing * rank;
    // Each direction keeps to its own side of the stream axis.
    const double lane = -dir * k.crosswalk_lane_offset;
    const double lateral0 = lane + rng.uniform(-k.crosswalk_jitter, k.crosswalk_jitter);
    const double lateral1 = lane + rng.uniform(-k.crosswalk_jitter, k.crosswalk_jitter);
    PedestrianSpec p;
    p.desired_speed = k.desired_speed;
    if (x_stream) {
      p.start = {-dir * reach, lateral0};
      p.goal = {dir * reach, lateral1};
    } else {
      p.start = {-lateral0, -dir * reach};
      p.goal = {-lateral1, dir * reach};
    }
    s.pedestrians.push_back(p);
  }
  s.robot_start = k.crosswalk_robot_start;
  s.robot_goal = k.crosswalk_robot_goal;
  s.robot_heading = face(s.robot_start, s.robot_goal);
  fit_bounds(s, k.bounds_margin);
  return s;
}

Scenario make_box(std::uint64_t seed, int n, const ScenarioConstants& k) {
  require_count(n);
  Scenario s = base(ScenarioId::box, seed, k);
  RngStream rng(seed, 0);
  // The seed only rotates the ring; spacing and antipodal goals are exact.
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  for (int i = 0; i < n; ++i) {
    const double angle = phase + 2.0 * kPi * i / n;
    const Vec2 start{k.box_radius * std::cos(angle), k.box_radius * std::sin(angle)};
    s.pedestrians.push_back({start, -start, k.desired_speed});
  }
  s.robot_start = {0.0, 0.0};
  s.robot_goal = k.box_robot_goal;
  s.robot_heading = face(s.robot_start, s.robot_goal);
  fit_bounds(s, k.bounds_margin);
  return s;
}

Scenario make_concert(std::uint64_t seed, int n, const ScenarioConstants& k) {
  require_count(n);
  Scenario s = base(ScenarioId::concert, seed, k);
  RngStream rng(seed, 0);
  if (n > 0) {
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    const int rows = (n + cols - 1) / cols;
    const double w = k.concert_patch / cols;
    const double h = k.concert_patch / rows;
    const double jx = std::min(k.concert_jitter, w / 4.0);
    const double jy = std::min(k.concert_jitter, h / 4.0);
    for (int i = 0; i < n; ++i) {
      const int c = i % cols;
      const int r = i / cols;
      const double x = -k.concert_patch / 2.0 + (c + 0.5) * w + rng.uniform(-jx, jx);
      const double y = -k.concert_patch / 2.0 + (r + 0.5) * h + rng.uniform(-jy, jy);
      s.pedestrians.push_back({{x, y}, {x, y}, k.desired_speed});
    }
  }
  s.robot_start = k.concert_robot_start;
  s.robot_goal = k.concert_robot_goal;
  s.robot_heading = face(s.robot_start, s.robot_goal);
  fit_bounds(s, k.bounds_margin);
  return s;
}

Scenario make(ScenarioId id, std::uint64_t seed, int n, const ScenarioConstants& k) {
  switch (id) {
    case ScenarioId::random: return make_random(seed, n, k);
    case ScenarioId::footpath: return make_footpath(seed, n, k);
    case ScenarioId::crosswalk: return make_crosswalk(seed, n, k);
    case ScenarioId::crossfootpath: return make_crossfootpath(seed, n, k);
    case ScenarioId::box: return make_box(seed, n, k);
    case ScenarioId::concert: return make_concert(seed, n, k);
  }
  throw Error("unknown scenario id");
}

Vec2 sample_goal(RngStream& rng, const Bounds& bounds, Vec2 from, Vec2 robot_goal, const ScenarioConstants& k) {
  return rejection_sample(rng, bounds, k.max_attempts, "pedestrian goal", [&](Vec2 p) {
    return distance(p, from) >= k.random_min_goal_distance && distance(p, robot_goal) >= k.social_zone;
  });
}

void validate(const Scenario& s, const ScenarioConstants& k) {
  auto fail = [&](const std::string& what) { throw Error("scenario " + to_string(s.id) + ": " + what); };
  if (!(s.pedestrian_radius > 0.0) || !(s.robot_radius > 0.0)) fail("radii must be > 0");
  if (!s.bounds.contains(s.robot_start) || !s.bounds.contains(s.robot_goal)) fail("robot start/goal out of bounds");
  for (std::size_t i = 0; i < s.pedestrians.size(); ++i) {
    const auto& p = s.pedestrians[i];
    const std::string tag = "pedestrian " + std::to_string(i);
    if (!is_finite(p.start) || !is_finite(p.goal) || !(p.desired_speed >= 0.0)) fail(tag + " has invalid values");
    if (!s.bounds.contains(p.start) || !s.bounds.contains(p.goal)) fail(tag + " start/goal out of bounds");
    if (distance(p.start, s.robot_start) < k.social_zone) fail(tag + " starts inside the robot social zone");
    if (s.id == ScenarioId::random && distance(p.start, p.goal) < k.random_min_goal_distance) {
      fail(tag + " goal too close to its start");
    }
  }
  if (s.id == ScenarioId::random && distance(s.robot_start, s.robot_goal) < k.random_min_robot_separation) {
    fail("robot start and goal too close");
  }
}

}  // namespace scenarios
}  // namespace srfm
