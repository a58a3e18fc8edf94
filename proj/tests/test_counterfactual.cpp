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

#include "srfm/counterfactual.hpp"
#include "srfm/metrics.hpp"
#include "srfm/policies.hpp"

namespace srfm {
namespace {

TEST(Twin, ZeroRobotStrengthGivesIdenticalTwins) {
  SimConfig c;
  c.params.A_r = 0.0;
  for (ScenarioId id : evaluation_scenarios()) {
    for (const char* name : {"goal_seek", "dwa", "vo", "stand_still"}) {
      const Scenario s = scenarios::make(id, 21);
      auto policy = policies::make_policy(name, c.policy_context());
      const TwinRunResult twin = counterfactual::run_twin(s, *policy, c, RngStream(21, 0));
      ASSERT_EQ(twin.factual.frames.size(), twin.counterfactual.frames.size());
      for (std::size_t k = 0; k < twin.factual.frames.size(); ++k) {
        ASSERT_EQ(twin.factual.frames[k].pedestrians, twin.counterfactual.frames[k].pedestrians)
            << to_string(id) << " " << name << " frame " << k;
      }
      EXPECT_EQ(metrics::episode_metrics(twin).mean_frechet, 0.0);
    }
  }
}

TEST(Twin, CounterfactualReplaysRobotPath) {
  SimConfig c;
  policies::GoalSeekPolicy gs;
  const TwinRunResult twin = counterfactual::run_twin(scenarios::make_crosswalk(2), gs, c, RngStream(2, 0));
  EXPECT_EQ(twin.factual.robot_trajectory().samples, twin.counterfactual.robot_trajectory().samples);
  EXPECT_EQ(twin.factual.steps(), twin.counterfactual.steps());
  EXPECT_TRUE(twin.counterfactual.config.robot_force_enabled == false);
}

TEST(Twin, FarStationaryRobotNegligible) {
  Scenario s = scenarios::make_footpath(3);
  s.robot_start = {0.0, 20.0};
  s.robot_goal = {5.0, 20.0};
  s.bounds.max.y = 22.0;
  policies::StandStillPolicy still;
  SimConfig c;
  c.max_steps = 200;
  const TwinRunResult twin = counterfactual::run_twin(s, still, c, RngStream(3, 0));
  const metrics::EpisodeMetrics m = metrics::episode_metrics(twin);
  for (double f : m.frechet_per_pedestrian) EXPECT_LT(f, 1e-3);
}

TEST(Twin, RobotJustInsideCutoffBoundedByForce) {
  // Robot parked 9 m off the lanes: the force bound A_r e^((0.6 - 9) / 0.99)
  // times the squared horizon caps the drift.
  Scenario s = scenarios::make_footpath(3, 2);
  s.robot_start = {0.0, 10.5};
  s.robot_goal = {5.0, 10.5};
  s.bounds.max.y = 12.0;
  policies::StandStillPolicy still;
  SimConfig c;
  c.max_steps = 50;
  const TwinRunResult twin = counterfactual::run_twin(s, still, c, RngStream(3, 0));
  const double bound = 7.93 * std::exp((0.6 - 8.0) / 0.99) * 0.5 * 5.0 * 5.0;
  for (double f : metrics::episode_metrics(twin).frechet_per_pedestrian) EXPECT_LT(f, bound);
}

TEST(Twin, CrosswalkGoalSeekDeviates) {
  SimConfig c;
  policies::GoalSeekPolicy gs;
  const TwinRunResult twin = counterfactual::run_twin(scenarios::make_crosswalk(0), gs, c, RngStream(0, 0));
  const metrics::EpisodeMetrics m = metrics::episode_metrics(twin);
  EXPECT_GT(m.mean_frechet, 0.0);
  EXPECT_GT(m.max_frechet, 0.0);
}

TEST(Twin, CounterfactualIndependentOfPolicyGivenActions) {
  SimConfig c;
  const Scenario s = scenarios::make_crossfootpath(6);
  policies::DwaPolicy dwa({}, c.policy_context());
  const TwinRunResult a = counterfactual::run_twin(s, dwa, c, RngStream(6, 0));
  policies::ReplayPolicy replay(a.factual.actions);
  const TwinRunResult b = counterfactual::run_twin(s, replay, c, RngStream(6, 0));
  EXPECT_EQ(a.counterfactual, b.counterfactual);
  EXPECT_EQ(a.factual.frames, b.factual.frames);
}

TEST(Twin, RemoveModeDropsRobot) {
  SimConfig c;
  policies::GoalSeekPolicy gs;
  const TwinRunResult twin =
      counterfactual::run_twin(scenarios::make_box(1), gs, c, RngStream(1, 0), TwinMode::remove);
  EXPECT_EQ(twin.mode, TwinMode::remove);
  for (const Frame& f : twin.counterfactual.frames) EXPECT_FALSE(f.robot);
  EXPECT_EQ(twin.counterfactual.steps(), twin.factual.steps());
}

TEST(Twin, ReassigningScenarioRejected) {
  SimConfig c;
  policies::GoalSeekPolicy gs;
  EXPECT_THROW(counterfactual::run_twin(scenarios::make_random(1), gs, c, RngStream(1, 0)), Error);
  c.reassign_goals = false;
  EXPECT_NO_THROW(counterfactual::run_twin(scenarios::make_random(1), gs, c, RngStream(1, 0)));
}

TEST(Twin, PairsMatchIds) {
  SimConfig c;
  policies::GoalSeekPolicy gs;
  const TwinRunResult twin = counterfactual::run_twin(scenarios::make_concert(1), gs, c, RngStream(1, 0));
  const auto pairs = twin.pairs();
  ASSERT_EQ(pairs.size(), 10u);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(pairs[i].first.agent_id, static_cast<int>(i) + 1);
    EXPECT_EQ(pairs[i].first.agent_id, pairs[i].second.agent_id);
  }
}

TEST(TwinMode, Parse) {
  EXPECT_EQ(parse_twin_mode("replay"), TwinMode::replay);
  EXPECT_EQ(parse_twin_mode("remove"), TwinMode::remove);
  EXPECT_THROW(parse_twin_mode("erase"), Error);
}

}  // namespace
}  // namespace srfm
