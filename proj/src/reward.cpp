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

#include "srfm/reward.hpp"

#include <algorithm>

namespace srfm::counterfactual {

double one_step_divergence(const AgentState& pedestrian, std::span<const AgentState> all_states,
                           const AgentState& robot, const SrfmParams& params, double dt,
                           std::span<const Obstacle> obstacles) {
  auto predict = [&](bool robot_force) {
    const ForceBreakdown f = forces::total_force(pedestrian, all_states, &robot, obstacles, params, robot_force);
    const Vec2 v = pedestrian.velocity + f.total * dt;
    return pedestrian.position + v * dt;
  };
  return distance(predict(true), predict(false));
}

double divergence_penalty(std::span<const AgentState> pedestrians, const AgentState& robot,
                          const SrfmParams& params, double dt, double penalty_zone,
                          std::span<const Obstacle> obstacles) {
  double sum = 0.0;
  for (const AgentState& p : pedestrians) {
    if (distance(p.position, robot.position) > penalty_zone) continue;
    sum += one_step_divergence(p, pedestrians, robot, params, dt, obstacles);
  }
  return sum;
}

RewardComponents reward(const RewardContext& context, const RewardConfig& config) {
  RewardComponents r;
  if (context.terminal) {
    switch (*context.terminal) {
      case Outcome::success: r.r_term = config.success_reward; break;
      case Outcome::timeout: r.r_term = -config.timeout_penalty; break;
      case Outcome::collision: r.r_term = -2.0 * config.timeout_penalty; break;
    }
  }
  r.r_dist = context.start_goal_distance < kEpsilon
                 ? 0.0
                 : std::clamp(context.goal_distance / context.start_goal_distance, 0.0, 1.0);
  r.r_div = context.divergence;
  r.r_total = r.r_term - config.k1 * r.r_dist - config.k2 * r.r_div;
  return r;
}

}  // namespace srfm::counterfactual
