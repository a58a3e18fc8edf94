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

#include <optional>
#include <span>

#include "srfm/core.hpp"

namespace srfm {

/// Parameters of the social robot force model. Forces act on unit mass, so
/// every strength is an acceleration (m/s^2).
struct SrfmParams {
  double A_p = 2.0;      ///< pedestrian repulsion strength
  double B_p = 0.89;     ///< pedestrian repulsion range (m)
  double lambda = 0.4;   ///< anisotropy weight for sources behind the subject
  double tau = 0.6;      ///< relaxation time (s)
  double A_r = 7.93;     ///< robot repulsion strength
  double B_r = 0.99;     ///< robot repulsion range (m)
  double A_o = 2.0;      ///< obstacle repulsion strength
  double B_o = 0.89;     ///< obstacle repulsion range (m)

  // Per-class anisotropy switches.
  bool anisotropic_pedestrians = true;
  bool anisotropic_robot = true;
  bool anisotropic_obstacles = true;

  /// Values learned from pedestrian data with a robot present.
  static SrfmParams learned();
  /// Values reported by Ferrer et al.; used as the default fit warm start.
  static SrfmParams ferrer();

  friend bool operator==(const SrfmParams&, const SrfmParams&) = default;
};

/// Throws srfm::Error when a parameter is outside its admissible range.
void validate(const SrfmParams& params);

struct Obstacle {
  Vec2 center;
  double radius = 0.0;

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

struct ForceBreakdown {
  Vec2 attraction;
  Vec2 pedestrian_repulsion;
  Vec2 obstacle_repulsion;
  Vec2 robot_repulsion;
  Vec2 total;
};

/// Sources farther than this (center distance, m) are ignored.
inline constexpr double kNeighborCutoff = 10.0;

namespace forces {

/// Direction the subject is facing: unit velocity while moving, otherwise
/// the unit vector toward its goal (zero if it stands on the goal).
Vec2 heading_of(const AgentState& subject);

/// Desired velocity: desired_speed along the direction to the goal.
Vec2 desired_velocity(const AgentState& state);

/// Relaxation toward the desired velocity, (v0 - v) / tau.
Vec2 attraction_force(const AgentState& state, const SrfmParams& params);

/// lambda + (1 - lambda) (1 + cos phi) / 2.
double anisotropy(double phi, double lambda);

/// Ingredients of one exponential repulsion, shared by the force itself and
/// the analytic parameter derivatives used by the fitter.
struct RepulsionGeometry {
  Vec2 direction;          ///< unit vector from source to subject
  double gap = 0.0;        ///< d - x: radii sum minus center distance
  double phi = 0.0;        ///< angle between heading and the source
  bool overlap = false;    ///< centers coincide; direction is a tie-break
};

RepulsionGeometry repulsion_geometry(const AgentState& subject, Vec2 source_position,
                                     double source_radius, int source_id = -1);

/// A exp((d - x) / B) psi(phi, lambda), directed from the source to the
/// subject. Coincident centers push with magnitude A along a deterministic
/// direction derived from the id pair.
Vec2 repulsion_force(const AgentState& subject, Vec2 source_position, double source_radius,
                     double A, double B, double lambda, int source_id = -1,
                     bool anisotropic = true);

/// Direction used when two centers coincide. Antisymmetric in the id pair so
/// both agents are pushed apart.
Vec2 overlap_direction(int subject_id, int source_id);

/// All force terms on `subject`. Entries of `pedestrians` sharing the
/// subject's id are skipped. Sources are summed in ascending id order.
ForceBreakdown total_force(const AgentState& subject, std::span<const AgentState> pedestrians,
                           const AgentState* robot, std::span<const Obstacle> obstacles,
                           const SrfmParams& params, bool robot_force_enabled,
                           double neighbor_cutoff = kNeighborCutoff);

}  // namespace forces
}  // namespace srfm
