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

#include "srfm/policies.hpp"
#include "srfm/sim.hpp"

namespace srfm {
namespace {

Scenario single_walker(double length) {
  Scenario s;
  s.id = ScenarioId::footpath;
  s.bounds = {{-20, -20}, {20, 20}};
  s.pedestrians = {{{0, 5}, {length, 5}, 1.0}};
  s.robot_start = {0, -15};
  s.robot_goal = {10, -15};
  return s;
}

std::optional<double> arrival(const EpisodeRecord& r, int id) {
  for (const Event& e : r.events) {
    if (e.kind == EventKind::goal_reached && e.agent_id == id) return e.t;
  }
  return std::nullopt;
}

TEST(StepRobot, Kinematics) {
  const SimConfig c;
  AgentState r;
  const AgentState moved = sim::step_robot(r, Action(0.5, 0.0), c);
  EXPECT_DOUBLE_EQ(moved.position.x, 0.05);
  EXPECT_EQ(moved.position.y, 0.0);
  const AgentState turned = sim::step_robot(r, Action(0.0, kPi), c);
  EXPECT_EQ(turned.position, r.position);
  EXPECT_DOUBLE_EQ(turned.heading, kPi * 0.1);
  Action fast;
  fast.v = 1.0;
  EXPECT_DOUBLE_EQ(sim::step_robot(r, fast, c).position.x, 0.05);
}

TEST(StepRobot, HeadingUpdatedBeforeTranslation) {
  const SimConfig c;
  AgentState r;
  const AgentState next = sim::step_robot(r, Action(0.5, kPi / 2), c);
  const double theta = kPi / 2 * 0.1;
  EXPECT_DOUBLE_EQ(next.position.x, 0.05 * std::cos(theta));
  EXPECT_DOUBLE_EQ(next.position.y, 0.05 * std::sin(theta));
  EXPECT_DOUBLE_EQ(norm(next.velocity), 0.5);
}

TEST(StepPedestrians, EquilibriumUnchangedButMoved) {
  SimConfig c;
  AgentState p;
  p.id = 1;
  p.velocity = {1, 0};
  p.goal = {10, 0};
  const std::vector<AgentState> s = {p};
  const auto next = sim::step_pedestrians(s, nullptr, {}, c);
  EXPECT_EQ(next[0].velocity, p.velocity);
  EXPECT_DOUBLE_EQ(next[0].position.x, 0.1);
}

TEST(StepPedestrians, SpeedCap) {
  SimConfig c;
  AgentState p;
  p.id = 1;
  p.velocity = {1.2, 0};
  p.goal = {10, 0};
  p.desired_speed = 5.0;
  const std::vector<AgentState> s = {p};
  const auto next = sim::step_pedestrians(s, nullptr, {}, c);
  EXPECT_NEAR(norm(next[0].velocity), c.speed_cap, 1e-15);
}

TEST(StepPedestrians, RobotFlagIrrelevantWithoutRobot) {
  const Scenario s = scenarios::make_crosswalk(3);
  const auto peds = sim::initial_pedestrians(s);
  SimConfig on;
  SimConfig off;
  off.robot_force_enabled = false;
  EXPECT_EQ(sim::step_pedestrians(peds, nullptr, {}, on), sim::step_pedestrians(peds, nullptr, {}, off));
}

TEST(Episode, FreeFlowArrival) {
  // Free flow reaches the goal zone edge at (length - goal_radius) / speed.
  SimConfig c;
  policies::StandStillPolicy still;
  const EpisodeRecord r = sim::run_episode(single_walker(9.0), still, c, RngStream(1, 0));
  ASSERT_TRUE(arrival(r, 1));
  EXPECT_NEAR(*arrival(r, 1), (9.0 - c.goal_radius) / 1.0, 2 * c.dt);
  c.goal_radius = 0.05;
  const EpisodeRecord tight = sim::run_episode(single_walker(9.0), still, c, RngStream(1, 0));
  ASSERT_TRUE(arrival(tight, 1));
  EXPECT_NEAR(*arrival(tight, 1), 9.0, 2 * c.dt);
}

TEST(Episode, SpeedCapHoldsEverywhere) {
  SimConfig c;
  policies::GoalSeekPolicy gs;
  for (ScenarioId id : evaluation_scenarios()) {
    const EpisodeRecord r = sim::run_episode(scenarios::make(id, 2), gs, c, RngStream(2, 0));
    for (const Frame& f : r.frames) {
      for (const AgentState& p : f.pedestrians) ASSERT_LE(norm(p.velocity), c.speed_cap + 1e-12);
    }
  }
}

TEST(Episode, EmptySceneGoalSeekSucceeds) {
  Scenario s = scenarios::make_footpath(1, 0);
  policies::GoalSeekPolicy gs;
  const EpisodeRecord r = sim::run_episode(s, gs, SimConfig{}, RngStream(1, 0));
  EXPECT_EQ(r.outcome, Outcome::success);
  EXPECT_LE(distance(r.frames.back().robot->position, s.robot_goal), 0.5);
  for (const Event& e : r.events) EXPECT_NE(e.kind, EventKind::collision);
}

TEST(Episode, StartAtGoalIsImmediateSuccess) {
  Scenario s = scenarios::make_footpath(1);
  s.robot_goal = s.robot_start;
  policies::GoalSeekPolicy gs;
  const EpisodeRecord r = sim::run_episode(s, gs, SimConfig{}, RngStream(1, 0));
  EXPECT_EQ(r.outcome, Outcome::success);
  EXPECT_EQ(r.steps(), 0u);
  EXPECT_TRUE(r.actions.empty());
}

TEST(Episode, BoxStandStillTimesOut) {
  SimConfig c;
  policies::StandStillPolicy still;
  const Scenario s = scenarios::make_box(0);
  const EpisodeRecord r = sim::run_episode(s, still, c, RngStream(0, 0));
  EXPECT_EQ(r.outcome, Outcome::timeout);
  EXPECT_EQ(r.steps(), static_cast<std::size_t>(c.max_steps));
  EXPECT_DOUBLE_EQ(r.end_time(), 75.0);
  // Regression pin: the symmetric ring jams around the robot and nobody
  // gets through to the far side.
  for (std::size_t i = 0; i < r.pedestrian_count(); ++i) {
    const Trajectory t = r.pedestrian_trajectory(i);
    EXPECT_FALSE(t.goal_reached_at.has_value()) << i;
    EXPECT_LT(norm(t.samples.back().position), 3.0) << i;
  }
  double closest = INFINITY;
  for (const Frame& f : r.frames) {
    for (const AgentState& p : f.pedestrians) closest = std::min(closest, distance(p.position, f.robot->position));
  }
  EXPECT_GT(closest, c.collision_distance);
  EXPECT_NEAR(closest, 2.268, 1e-3);
}

TEST(Episode, Deterministic) {
  SimConfig c;
  for (ScenarioId id : {ScenarioId::random, ScenarioId::crosswalk, ScenarioId::concert}) {
    const Scenario s = scenarios::make(id, 8);
    auto p1 = policies::make_policy("dwa", c.policy_context());
    auto p2 = policies::make_policy("dwa", c.policy_context());
    EXPECT_EQ(sim::run_episode(s, *p1, c, RngStream(8, 0)), sim::run_episode(s, *p2, c, RngStream(8, 0)));
  }
}

TEST(Episode, CollisionTerminates) {
  Scenario s;
  s.id = ScenarioId::footpath;
  s.bounds = {{-10, -10}, {10, 10}};
  s.pedestrians = {{{3, 0}, {-5, 0}, 1.0}};
  s.robot_start = {0, 0};
  s.robot_goal = {8, 0};
  SimConfig c;
  c.params.A_r = 0.0;
  policies::GoalSeekPolicy gs;
  const EpisodeRecord r = sim::run_episode(s, gs, c, RngStream(0, 0));
  EXPECT_EQ(r.outcome, Outcome::collision);
  EXPECT_EQ(r.events.back().kind, EventKind::collision);
  EXPECT_EQ(r.events.back().agent_id, 1);
}

TEST(Episode, RandomScenarioReassignsGoals) {
  SimConfig c;
  c.max_steps = 300;
  policies::StandStillPolicy still;
  const EpisodeRecord r = sim::run_episode(scenarios::make_random(4), still, c, RngStream(4, 0));
  int reassigned = 0;
  for (const Event& e : r.events) reassigned += e.kind == EventKind::goal_reassigned;
  EXPECT_GT(reassigned, 0);
  c.reassign_goals = false;
  const EpisodeRecord fixed = sim::run_episode(scenarios::make_random(4), still, c, RngStream(4, 0));
  for (const Event& e : fixed.events) EXPECT_NE(e.kind, EventKind::goal_reassigned);
}

TEST(Episode, FixedStepsAndRobotAbsent) {
  SimConfig c;
  policies::GoalSeekPolicy gs;
  const Scenario s = scenarios::make_crosswalk(1);
  const EpisodeRecord r = sim::run_episode(s, gs, c, RngStream(1, 0), {false, 37});
  EXPECT_EQ(r.steps(), 37u);
  EXPECT_EQ(r.outcome, Outcome::timeout);
  for (const Frame& f : r.frames) EXPECT_FALSE(f.robot.has_value());
  EXPECT_TRUE(r.robot_trajectory().empty());
}

TEST(Episode, StepAfterDoneThrows) {
  const Scenario s = scenarios::make_footpath(1);
  Scenario at_goal = s;
  at_goal.robot_goal = at_goal.robot_start;
  sim::Episode e(at_goal, SimConfig{}, RngStream(1, 0));
  EXPECT_TRUE(e.done());
  EXPECT_THROW(e.step({}), Error);
}

TEST(Episode, ObservationAndRewardFeedback) {
  SimConfig c;
  const Scenario s = scenarios::make_footpath(1, 0);
  sim::Episode e(s, c, RngStream(1, 0));
  EXPECT_DOUBLE_EQ(e.observation().goal_distance, distance(s.robot_start, s.robot_goal));
  const StepFeedback& fb = e.step(Action(0.5, 0.0));
  EXPECT_EQ(fb.step, 1);
  EXPECT_FALSE(fb.done);
  EXPECT_LT(fb.reward.r_dist, 1.0);
  EXPECT_EQ(fb.reward.r_div, 0.0);
  EXPECT_EQ(e.observation().last_action, Action(0.5, 0.0));
}

TEST(Config, Validation) {
  SimConfig c;
  EXPECT_NO_THROW(validate(c));
  c.dt = 0.0;
  EXPECT_THROW(validate(c), Error);
  c = {};
  c.max_steps = 0;
  EXPECT_THROW(validate(c), Error);
  c = {};
  c.robot_bounds.v_min = 1.0;
  EXPECT_THROW(validate(c), Error);
}

TEST(Record, TrajectoryGoalReachedAtIsFinalEntry) {
  SimConfig c;
  policies::StandStillPolicy still;
  const EpisodeRecord r = sim::run_episode(single_walker(4.0), still, c, RngStream(1, 0));
  const Trajectory t = r.pedestrian_trajectory(0);
  ASSERT_TRUE(t.goal_reached_at);
  EXPECT_EQ(*t.goal_reached_at, *arrival(r, 1));
  EXPECT_EQ(t.size(), r.frames.size());
}

TEST(EventKind, RoundTrip) {
  for (EventKind k : {EventKind::goal_reached, EventKind::goal_reassigned, EventKind::collision,
                      EventKind::robot_success, EventKind::timeout}) {
    EXPECT_EQ(parse_event_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_event_kind("bump"), Error);
}

}  // namespace
}  // namespace srfm
