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

#include "srfm/scenarios.hpp"

namespace srfm {
namespace {

double axis_angle_deg(Vec2 d, Vec2 axis) {
  return angle_between(d, axis) * 180.0 / kPi;
}

TEST(ScenarioId, RoundTrip) {
  for (ScenarioId id : {ScenarioId::random, ScenarioId::footpath, ScenarioId::crosswalk, ScenarioId::crossfootpath,
                        ScenarioId::box, ScenarioId::concert}) {
    EXPECT_EQ(parse_scenario_id(to_string(id)), id);
  }
  EXPECT_THROW(parse_scenario_id("plaza"), Error);
  EXPECT_EQ(evaluation_scenarios().size(), 5u);
}

TEST(Scenarios, DeterministicPerSeed) {
  for (ScenarioId id : {ScenarioId::random, ScenarioId::footpath, ScenarioId::crosswalk, ScenarioId::crossfootpath,
                        ScenarioId::box, ScenarioId::concert}) {
    EXPECT_EQ(scenarios::make(id, 17), scenarios::make(id, 17)) << to_string(id);
    EXPECT_EQ(scenarios::make(id, 17).pedestrians.size(), 10u);
  }
  EXPECT_NE(scenarios::make_footpath(1).pedestrians, scenarios::make_footpath(2).pedestrians);
}

TEST(Scenarios, NegativeCountRejected) {
  EXPECT_THROW(scenarios::make_box(0, -1), Error);
}

TEST(Random, ConstraintsHoldOverManySeeds) {
  const ScenarioConstants k;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Scenario s = scenarios::make_random(seed);
    ASSERT_NO_THROW(scenarios::validate(s)) << seed;
    EXPECT_TRUE(s.reassign_goals);
    EXPECT_DOUBLE_EQ(s.bounds.max.x - s.bounds.min.x, 15.0);
    EXPECT_GE(distance(s.robot_start, s.robot_goal), k.random_min_robot_separation);
    for (const PedestrianSpec& p : s.pedestrians) {
      ASSERT_GE(distance(p.start, s.robot_start), k.social_zone);
      ASSERT_GE(distance(p.start, p.goal), k.random_min_goal_distance);
      ASSERT_GE(distance(p.goal, s.robot_goal), k.social_zone);
    }
  }
}

TEST(Random, EmptyIsValid) {
  const Scenario s = scenarios::make_random(3, 0);
  EXPECT_TRUE(s.pedestrians.empty());
  EXPECT_NO_THROW(scenarios::validate(s));
}

TEST(Random, OverConstrainedThrows) {
  ScenarioConstants k;
  k.random_min_goal_distance = 100.0;
  k.max_attempts = 50;
  EXPECT_THROW(scenarios::make_random(1, 3, k), Error);
}

TEST(Footpath, LanesAlongX) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Scenario s = scenarios::make_footpath(seed);
    EXPECT_FALSE(s.reassign_goals);
    EXPECT_NO_THROW(scenarios::validate(s));
    EXPECT_EQ(s.robot_start, (Vec2{-6, -1}));
    EXPECT_EQ(s.robot_goal, (Vec2{6, 1}));
    for (const PedestrianSpec& p : s.pedestrians) {
      const Vec2 d = p.goal - p.start;
      EXPECT_LT(std::min(axis_angle_deg(d, {1, 0}), axis_angle_deg(d, {-1, 0})), 15.0);
    }
  }
}

TEST(Footpath, TwoPedestriansOnePerDirection) {
  const Scenario s = scenarios::make_footpath(5, 2);
  ASSERT_EQ(s.pedestrians.size(), 2u);
  EXPECT_GT((s.pedestrians[0].goal - s.pedestrians[0].start).x, 0.0);
  EXPECT_LT((s.pedestrians[1].goal - s.pedestrians[1].start).x, 0.0);
}

TEST(Crosswalk, PerpendicularStreamsThroughOrigin) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Scenario s = scenarios::make_crosswalk(seed);
    EXPECT_NO_THROW(scenarios::validate(s));
    int along_x = 0;
    int along_y = 0;
    for (const PedestrianSpec& p : s.pedestrians) {
      const Vec2 d = p.goal - p.start;
      const double to_x = std::min(axis_angle_deg(d, {1, 0}), axis_angle_deg(d, {-1, 0}));
      const double to_y = std::min(axis_angle_deg(d, {0, 1}), axis_angle_deg(d, {0, -1}));
      EXPECT_LT(std::min(to_x, to_y), 15.0);
      (to_x < to_y ? along_x : along_y)++;
    }
    EXPECT_EQ(along_x, 5);
    EXPECT_EQ(along_y, 5);
    // The robot's straight path runs through the crossing point.
    EXPECT_NEAR(cross(s.robot_goal - s.robot_start, Vec2{0, 0} - s.robot_start), 0.0, 1e-12);
  }
}

TEST(Crosswalk, MinimalCounts) {
  EXPECT_EQ(scenarios::make_crosswalk(1, 2).pedestrians.size(), 2u);
  EXPECT_NO_THROW(scenarios::validate(scenarios::make_crosswalk(1, 1)));
}

TEST(Crossfootpath, RobotCutsAcrossFlow) {
  const Scenario s = scenarios::make_crossfootpath(4);
  EXPECT_EQ(s.robot_start, (Vec2{0, -6}));
  EXPECT_EQ(s.robot_goal, (Vec2{0, 6}));
  EXPECT_NO_THROW(scenarios::validate(s));
}

TEST(Box, AntipodalRingAroundRobot) {
  const Scenario s = scenarios::make_box(9);
  Vec2 centroid;
  for (const PedestrianSpec& p : s.pedestrians) {
    EXPECT_EQ(p.goal, -p.start);
    EXPECT_NEAR(norm(p.start), 5.0, 1e-12);
    centroid += p.start / static_cast<double>(s.pedestrians.size());
  }
  EXPECT_NEAR(distance(centroid, s.robot_start), 0.0, 1e-12);
  EXPECT_EQ(s.robot_goal, (Vec2{6.5, 0}));
  EXPECT_NO_THROW(scenarios::validate(s));
}

TEST(Concert, StandingCrowdAcrossRobotPath) {
  const Scenario s = scenarios::make_concert(2);
  for (const PedestrianSpec& p : s.pedestrians) {
    EXPECT_EQ(p.goal, p.start);
    EXPECT_LE(std::abs(p.start.x), 3.0);
    EXPECT_LE(std::abs(p.start.y), 3.0);
  }
  EXPECT_LT(s.robot_start.x, -3.0);
  EXPECT_GT(s.robot_goal.x, 3.0);
  EXPECT_NO_THROW(scenarios::validate(s));
}

TEST(SampleGoal, RespectsDistances) {
  RngStream rng(5, 1);
  const Bounds b{{-7.5, -7.5}, {7.5, 7.5}};
  for (int i = 0; i < 200; ++i) {
    const Vec2 g = scenarios::sample_goal(rng, b, {1, 1}, {3, 3});
    EXPECT_TRUE(b.contains(g));
    EXPECT_GE(distance(g, {1, 1}), 7.0);
    EXPECT_GE(distance(g, {3, 3}), 2.0);
  }
}

TEST(Validate, RejectsStartInsideSocialZone) {
  Scenario s = scenarios::make_footpath(1);
  s.pedestrians[0].start = s.robot_start + Vec2{0.5, 0};
  EXPECT_THROW(scenarios::validate(s), Error);
}

}  // namespace
}  // namespace srfm
