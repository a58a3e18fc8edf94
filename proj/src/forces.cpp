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

#include "srfm/forces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace srfm {

SrfmParams SrfmParams::learned() { return SrfmParams{}; }

SrfmParams SrfmParams::ferrer() {
  SrfmParams p;
  p.A_p = 2.66;
  p.B_p = 0.79;
  p.lambda = 0.59;
  p.tau = 0.43;
  p.A_r = 2.66;
  p.B_r = 0.79;
  p.A_o = 2.66;
  p.B_o = 0.79;
  return p;
}

void validate(const SrfmParams& p) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("invalid SRFM parameters: ") + what);
  };
  require(p.A_p >= 0.0 && p.A_r >= 0.0 && p.A_o >= 0.0, "strengths must be >= 0");
  require(p.B_p > 0.0 && p.B_r > 0.0 && p.B_o > 0.0, "ranges must be > 0");
  require(p.tau > 0.0, "tau must be > 0");
  require(p.lambda >= 0.0 && p.lambda <= 1.0, "lambda must lie in [0, 1]");
  require(std::isfinite(p.A_p) && std::isfinite(p.A_r) && std::isfinite(p.A_o) && std::isfinite(p.B_p) &&
              std::isfinite(p.B_r) && std::isfinite(p.B_o) && std::isfinite(p.tau),
          "non-finite value");
}

namespace forces {

Vec2 heading_of(const AgentState& subject) {
  const UnitNorm v = unit_and_norm(subject.velocity);
  if (v.norm > 0.0) return v.unit;
  return unit_and_norm(subject.goal - subject.position).unit;
}

Vec2 desired_velocity(const AgentState& state) {
  return unit_and_norm(state.goal - state.position).unit * state.desired_speed;
}

Vec2 attraction_force(const AgentState& state, const SrfmParams& params) {
  return (desired_velocity(state) - state.velocity) / params.tau;
}

double anisotropy(double phi, double lambda) {
  return lambda + (1.0 - lambda) * (1.0 + std::cos(phi)) / 2.0;
}

Vec2 overlap_direction(int subject_id, int source_id) {
  const auto lo = static_cast<std::uint64_t>(static_cast<std::uint32_t>(std::min(subject_id, source_id)));
  const auto hi = static_cast<std::uint64_t>(static_cast<std::uint32_t>(std::max(subject_id, source_id)));
  const std::uint64_t h = splitmix64((hi << 32) | lo);
  const double angle = 2.0 * kPi * static_cast<double>(h >> 11) * 0x1.0p-53;
  const Vec2 dir{std::cos(angle), std::sin(angle)};
  return subject_id <= source_id ? dir : -dir;
}

RepulsionGeometry repulsion_geometry(const AgentState& subject, Vec2 source_position, double source_radius,
                                     int source_id) {
  RepulsionGeometry g;
  const UnitNorm away = unit_and_norm(subject.position - source_position);
  if (away.norm == 0.0) {
    g.overlap = true;
    g.direction = overlap_direction(subject.id, source_id);
    g.gap = subject.radius + source_radius;
    return g;
  }
  g.direction = away.unit;
  g.gap = (subject.radius + source_radius) - away.norm;
  g.phi = angle_between(heading_of(subject), -away.unit);
  return g;
}

Vec2 repulsion_force(const AgentState& subject, Vec2 source_position, double source_radius, double A, double B,
                     double lambda, int source_id, bool anisotropic) {
  const RepulsionGeometry g = repulsion_geometry(subject, source_position, source_radius, source_id);
  if (g.overlap) return g.direction * A;
  const double psi = anisotropic ? anisotropy(g.phi, lambda) : 1.0;
  const double magnitude = A * std::exp(g.gap / B) * psi;
  return g.direction * magnitude;
}

ForceBreakdown total_force(const AgentState& subject, std::span<const AgentState> pedestrians,
                           const AgentState* robot, std::span<const Obstacle> obstacles, const SrfmParams& params,
                           bool robot_force_enabled, double neighbor_cutoff) {
  ForceBreakdown f;
  f.attraction = attraction_force(subject, params);

  auto add_pedestrian = [&](const AgentState& other) {
    if (other.id == subject.id) return;
    if (distance(subject.position, other.position) > neighbor_cutoff) return;
    f.pedestrian_repulsion += repulsion_force(subject, other.position, other.radius, params.A_p, params.B_p,
                                              params.lambda, other.id, params.anisotropic_pedestrians);
  };
  const bool sorted = std::is_sorted(pedestrians.begin(), pedestrians.end(),
                                     [](const AgentState& a, const AgentState& b) { return a.id < b.id; });
  if (sorted) {
    for (const AgentState& other : pedestrians) add_pedestrian(other);
  } else {
    std::vector<std::size_t> order(pedestrians.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pedestrians[a].id < pedestrians[b].id; });
    for (std::size_t i : order) add_pedestrian(pedestrians[i]);
  }

  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const Obstacle& o = obstacles[i];
    const double clearance = distance(subject.position, o.center);
    if (clearance > neighbor_cutoff + o.radius) continue;
    f.obstacle_repulsion += repulsion_force(subject, o.center, o.radius, params.A_o, params.B_o, params.lambda,
                                            -1 - static_cast<int>(i), params.anisotropic_obstacles);
  }

  f.total = f.attraction + f.pedestrian_repulsion;
  f.total += f.obstacle_repulsion;
  if (robot != nullptr && robot_force_enabled &&
      distance(subject.position, robot->position) <= neighbor_cutoff) {
    f.robot_repulsion = repulsion_force(subject, robot->position, robot->radius, params.A_r, params.B_r,
                                        params.lambda, robot->id, params.anisotropic_robot);
    f.total += f.robot_repulsion;
  }
  return f;
}

}  // namespace forces
}  // namespace srfm
