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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "srfm/reward.hpp"

namespace srfm {
namespace {

AgentState walker(int id, Vec2 p, Vec2 v, Vec2 goal) {
  AgentState s;
  s.id = id;
  s.position = p;
  s.velocity = v;
  s.goal = goal;
  return s;
}

TEST(Divergence, ContactDeadAhead) {
  const AgentState p = walker(1, {0, 0}, {1, 0}, {10, 0});
  AgentState robot = walker(0, {0.6, 0}, {0, 0}, {0, 0});
  const std::vector<AgentState> all = {p};
  const double d = counterfactual::one_step_divergence(p, all, robot, SrfmParams{}, 0.1);
  EXPECT_NEAR(d, 7.93 * 0.01, 1e-12 * 0.0793);
}

TEST(Divergence, MatchesForceTimesDtSquared) {
  RngStream rng(4, 0);
  for (int i = 0; i < 200; ++i) {
    const AgentState p = walker(1, {rng.uniform(-1, 1), rng.uniform(-1, 1)}, {rng.uniform(-1, 1), 0.2}, {5, 5});
    AgentState robot = walker(0, {rng.uniform(-3, 3), rng.uniform(-3, 3)}, {}, {});
    const std::vector<AgentState> all = {p};
    const Vec2 fr = forces::repulsion_force(p, robot.position, robot.radius, 7.93, 0.99, 0.4, 0);
    const double d = counterfactual::one_step_divergence(p, all, robot, SrfmParams{}, 0.1);
    EXPECT_NEAR(d, norm(fr) * 0.01, 1e-13 + 1e-9 * norm(fr) * 0.01);
    EXPECT_GE(d, 0.0);
  }
}

TEST(Divergence, ZeroBeyondCutoffOrWithoutStrength) {
  const AgentState p = walker(1, {0, 0}, {1, 0}, {10, 0});
  AgentState far = walker(0, {10.5, 0}, {}, {});
  const std::vector<AgentState> all = {p};
  EXPECT_EQ(counterfactual::one_step_divergence(p, all, far, SrfmParams{}, 0.1), 0.0);
  SrfmParams zero;
  zero.A_r = 0.0;
  AgentState near = walker(0, {0.7, 0.1}, {}, {});
  EXPECT_EQ(counterfactual::one_step_divergence(p, all, near, zero, 0.1), 0.0);
}

TEST(Divergence, PenaltyZone) {
  const std::vector<AgentState> peds = {walker(1, {1, 0}, {}, {5, 0}), walker(2, {4, 0}, {}, {5, 0})};
  AgentState robot = walker(0, {0, 0}, {}, {});
  const double sum = counterfactual::divergence_penalty(peds, robot, SrfmParams{}, 0.1, 3.0);
  const double first = counterfactual::one_step_divergence(peds[0], peds, robot, SrfmParams{}, 0.1);
  EXPECT_EQ(sum, first);
}

TEST(Reward, SuccessAtGoal) {
  const RewardConfig c;
  const RewardComponents r = counterfactual::reward({Outcome::success, 0.0, 8.0, 0.0}, c);
  EXPECT_EQ(r.r_total, c.success_reward);
}

TEST(Reward, CollisionCostsTwiceTimeout) {
  const RewardConfig c;
  EXPECT_EQ(counterfactual::reward({Outcome::collision, 2.0, 8.0, 0.0}, c).r_term, -2.0 * c.timeout_penalty);
  EXPECT_EQ(counterfactual::reward({Outcome::timeout, 2.0, 8.0, 0.0}, c).r_term, -c.timeout_penalty);
}

TEST(Reward, HalfwayNoPedestrians) {
  const RewardConfig c;
  const RewardComponents r = counterfactual::reward({std::nullopt, 4.0, 8.0, 0.0}, c);
  EXPECT_EQ(r.r_dist, 0.5);
  EXPECT_DOUBLE_EQ(r.r_total, -c.k1 * 0.5);
}

TEST(Reward, DistanceClampedAndDivergenceMonotone) {
  const RewardConfig c;
  EXPECT_EQ(counterfactual::reward({std::nullopt, 20.0, 8.0, 0.0}, c).r_dist, 1.0);
  double prev = INFINITY;
  for (double div : {0.0, 0.01, 0.1, 1.0}) {
    const double r = counterfactual::reward({std::nullopt, 3.0, 8.0, div}, c).r_total;
    EXPECT_LT(r, prev);
    prev = r;
  }
}

}  // namespace
}  // namespace srfm
