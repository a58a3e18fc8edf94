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

#include "srfm/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace srfm {

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::success: return "success";
    case Outcome::collision: return "collision";
    case Outcome::timeout: return "timeout";
  }
  return "unknown";
}

Outcome parse_outcome(std::string_view name) {
  for (Outcome o : {Outcome::success, Outcome::collision, Outcome::timeout}) {
    if (to_string(o) == name) return o;
  }
  throw Error("unknown outcome '" + std::string(name) + "'");
}

namespace {
double clamp_finite(double x, double lo, double hi) {
  if (std::isnan(x)) return 0.0;
  return std::clamp(x, lo, hi);
}
}  // namespace

Action::Action(double v_, double w_) {
  const ActionBounds b;
  v = clamp_finite(v_, b.v_min, b.v_max);
  w = clamp_finite(w_, b.w_min, b.w_max);
}

Action Action::clamped(const ActionBounds& bounds) const {
  Action a;
  a.v = clamp_finite(v, bounds.v_min, bounds.v_max);
  a.w = clamp_finite(w, bounds.w_min, bounds.w_max);
  return a;
}

std::vector<double> Observation::flatten() const {
  std::vector<double> out;
  out.reserve(kLength);
  out.push_back(goal_distance);
  out.push_back(goal_angle);
  for (const auto& slot : pedestrians) {
    out.push_back(slot.distance);
    out.push_back(slot.angle);
    out.push_back(slot.valid ? 1.0 : 0.0);
  }
  out.push_back(last_action.v);
  out.push_back(last_action.w);
  out.push_back(success ? 1.0 : 0.0);
  out.push_back(terminated ? 1.0 : 0.0);
  return out;
}

Observation Observation::unflatten(std::span<const double> data) {
  if (data.size() != kLength) {
    throw Error("observation length " + std::to_string(data.size()) + " != " + std::to_string(kLength));
  }
  Observation obs;
  std::size_t i = 0;
  obs.goal_distance = data[i++];
  obs.goal_angle = data[i++];
  for (auto& slot : obs.pedestrians) {
    slot.distance = data[i++];
    slot.angle = data[i++];
    slot.valid = data[i++] != 0.0;
  }
  obs.last_action.v = data[i++];
  obs.last_action.w = data[i++];
  obs.success = data[i++] != 0.0;
  obs.terminated = data[i++] != 0.0;
  return obs;
}

Observation build_observation(const AgentState& robot, std::span<const AgentState> pedestrians, Vec2 goal,
                              Action last_action, bool success, bool terminated, double social_zone_radius) {
  Observation obs;
  const Vec2 to_goal = rotate(goal - robot.position, -robot.heading);
  obs.goal_distance = norm(to_goal);
  obs.goal_angle = obs.goal_distance < kEpsilon ? 0.0 : std::atan2(to_goal.y, to_goal.x);
  obs.last_action = last_action;
  obs.success = success;
  obs.terminated = terminated;

  struct Candidate {
    double distance;
    int id;
    Vec2 local;
  };
  std::vector<Candidate> inside;
  for (const AgentState& p : pedestrians) {
    const Vec2 local = rotate(p.position - robot.position, -robot.heading);
    const double d = norm(local);
    if (d <= social_zone_radius) inside.push_back({d, p.id, local});
  }
  std::sort(inside.begin(), inside.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  const std::size_t kept = std::min(inside.size(), Observation::kSlots);
  for (std::size_t i = 0; i < kept; ++i) {
    const Candidate& c = inside[i];
    obs.pedestrians[i] = {c.distance, c.distance < kEpsilon ? 0.0 : std::atan2(c.local.y, c.local.x), true};
  }
  return obs;
}

}  // namespace srfm
