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
#include "srfm/forces.hpp"
#include "srfm/policy.hpp"

namespace srfm {

struct RewardConfig {
  double success_reward = 10.0;   ///< R_succ
  double timeout_penalty = 5.0;   ///< R_timeout; collisions cost twice this
  double k1 = 0.1;                ///< weight of the normalized goal distance
  double k2 = 1.0;                ///< weight of the divergence penalty
  double penalty_zone = 3.0;      ///< divergence counted within this robot distance (m)

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

namespace counterfactual {

/// Distance between the pedestrian's next position predicted with and
/// without the robot force (one explicit Euler step, no speed cap).
double one_step_divergence(const AgentState& pedestrian, std::span<const AgentState> all_states,
                           const AgentState& robot, const SrfmParams& params, double dt,
                           std::span<const Obstacle> obstacles = {});

/// Sum of one_step_divergence over pedestrians within `penalty_zone` of the
/// robot.
double divergence_penalty(std::span<const AgentState> pedestrians, const AgentState& robot,
                          const SrfmParams& params, double dt, double penalty_zone,
                          std::span<const Obstacle> obstacles = {});

struct RewardContext {
  std::optional<Outcome> terminal;
  double goal_distance = 0.0;
  double start_goal_distance = 0.0;
  double divergence = 0.0;
};

/// r_total = r_term - k1 r_dist - k2 r_div.
RewardComponents reward(const RewardContext& context, const RewardConfig& config);

}  // namespace counterfactual
}  // namespace srfm
