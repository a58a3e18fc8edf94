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

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "srfm/core.hpp"

namespace srfm {

enum class Outcome { success, collision, timeout };

std::string to_string(Outcome outcome);
Outcome parse_outcome(std::string_view name);

struct ActionBounds {
  double v_min = -0.5;
  double v_max = 0.5;
  double w_min = -kPi;
  double w_max = kPi;

  friend bool operator==(const ActionBounds&, const ActionBounds&) = default;
};

/// Robot command: linear speed (m/s) and turn rate (rad/s). Construction
/// clamps into the default action space; NaN components become 0.
struct Action {
  double v = 0.0;
  double w = 0.0;

  constexpr Action() = default;
  Action(double v_, double w_);

  [[nodiscard]] Action clamped(const ActionBounds& bounds) const;

  friend bool operator==(const Action&, const Action&) = default;
};

struct PedestrianSlot {
  double distance = 0.0;
  double angle = 0.0;
  bool valid = false;

  friend bool operator==(const PedestrianSlot&, const PedestrianSlot&) = default;
};

/// What a navigation policy sees. Everything is relative to the robot body
/// frame (x forward, counter-clockwise positive angles).
struct Observation {
  static constexpr std::size_t kSlots = 10;
  /// Length of the flat encoding: goal (2) + slots (3 each) + last action (2)
  /// + success/terminated flags (2).
  static constexpr std::size_t kLength = 2 + 3 * kSlots + 2 + 2;

  double goal_distance = 0.0;
  double goal_angle = 0.0;
  std::array<PedestrianSlot, kSlots> pedestrians{};
  Action last_action;
  bool success = false;
  bool terminated = false;

  [[nodiscard]] std::vector<double> flatten() const;
  static Observation unflatten(std::span<const double> data);

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Builds the observation for `robot`. Pedestrians farther than
/// `social_zone_radius` (center distance) are dropped; the nearest kSlots are
/// kept, sorted by distance then id.
Observation build_observation(const AgentState& robot, std::span<const AgentState> pedestrians, Vec2 goal,
                              Action last_action, bool success, bool terminated, double social_zone_radius);

struct RewardComponents {
  double r_term = 0.0;
  double r_dist = 0.0;
  double r_div = 0.0;
  double r_total = 0.0;

  friend bool operator==(const RewardComponents&, const RewardComponents&) = default;
};

struct StepFeedback {
  int step = 0;
  RewardComponents reward;
  bool done = false;
};

struct EpisodeInfo {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::uint64_t episode_id = 0;
};

/// Settings every policy may depend on.
struct PolicyContext {
  double dt = 0.1;
  double collision_distance = 0.6;
  double social_zone_radius = 2.0;
  ActionBounds bounds;
};

/// Thrown when an out-of-process policy cannot be reached or misbehaves.
class PolicyTransportError : public Error {
 public:
  using Error::Error;
};

/// A robot navigation policy. Instances are stateful and serve one episode
/// at a time.
class Policy {
 public:
  virtual ~Policy() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  virtual void reset(const EpisodeInfo& /*info*/) {}
  /// `feedback` describes the transition that produced `obs` (zeros at the
  /// first step).
  virtual Action act(const Observation& obs, const StepFeedback& feedback) = 0;
  /// Called once with the terminal observation.
  virtual void finish(const Observation& /*obs*/, const StepFeedback& /*feedback*/) {}
};

}  // namespace srfm
