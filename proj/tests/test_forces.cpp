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

#include "srfm/forces.hpp"

namespace srfm {
namespace {

AgentState ped(int id, Vec2 p, Vec2 v, Vec2 goal, double speed = 1.0) {
  AgentState s;
  s.id = id;
  s.position = p;
  s.velocity = v;
  s.goal = goal;
  s.desired_speed = speed;
  return s;
}

TEST(Params, Defaults) {
  const SrfmParams p = SrfmParams::learned();
  EXPECT_EQ(p.A_p, 2.0);
  EXPECT_EQ(p.B_p, 0.89);
  EXPECT_EQ(p.lambda, 0.4);
  EXPECT_EQ(p.tau, 0.6);
  EXPECT_EQ(p.A_r, 7.93);
  EXPECT_EQ(p.B_r, 0.99);
  const SrfmParams f = SrfmParams::ferrer();
  EXPECT_EQ(f.A_p, 2.66);
  EXPECT_EQ(f.B_p, 0.79);
  EXPECT_EQ(f.lambda, 0.59);
  EXPECT_EQ(f.tau, 0.43);
}

TEST(Params, Validation) {
  SrfmParams p;
  EXPECT_NO_THROW(validate(p));
  p.lambda = 1.5;
  EXPECT_THROW(validate(p), Error);
  p = {};
  p.B_r = 0.0;
  EXPECT_THROW(validate(p), Error);
  p = {};
  p.tau = 0.0;
  EXPECT_THROW(validate(p), Error);
  p = {};
  p.A_r = -1.0;
  EXPECT_THROW(validate(p), Error);
}

TEST(Attraction, Equilibrium) {
  const AgentState s = ped(1, {0, 0}, {1, 0}, {10, 0});
  EXPECT_EQ(forces::attraction_force(s, {}), (Vec2{0.0, 0.0}));
}

TEST(Attraction, FromRest) {
  const AgentState s = ped(1, {0, 0}, {0, 0}, {10, 0});
  const Vec2 f = forces::attraction_force(s, {});
  EXPECT_DOUBLE_EQ(f.x, 1.0 / 0.6);
  EXPECT_EQ(f.y, 0.0);
}

TEST(Attraction, OnGoalBrakes) {
  const AgentState s = ped(1, {2, 3}, {0.3, -0.6}, {2, 3});
  const Vec2 f = forces::attraction_force(s, {});
  EXPECT_DOUBLE_EQ(f.x, -0.3 / 0.6);
  EXPECT_DOUBLE_EQ(f.y, 0.6 / 0.6);
}

TEST(Anisotropy, Endpoints) {
  for (double lambda : {0.0, 0.25, 0.4, 0.59, 1.0}) {
    EXPECT_EQ(forces::anisotropy(0.0, lambda), 1.0);
    EXPECT_EQ(forces::anisotropy(kPi, lambda), lambda);
  }
  EXPECT_NEAR(forces::anisotropy(kPi / 2, 0.4), 0.7, 1e-15);
}

TEST(Anisotropy, MonotoneAndBounded) {
  double prev = 2.0;
  for (int i = 0; i <= 100; ++i) {
    const double psi = forces::anisotropy(kPi * i / 100, 0.4);
    EXPECT_LE(psi, prev);
    EXPECT_GE(psi, 0.4);
    EXPECT_LE(psi, 1.0);
    prev = psi;
  }
}

TEST(Repulsion, TouchingHeadOnHasMagnitudeA) {
  // Subject walks +x toward a source 0.6 m ahead: phi = 0, x = d.
  const AgentState s = ped(1, {0, 0}, {1, 0}, {10, 0});
  const Vec2 f = forces::repulsion_force(s, {0.6, 0}, 0.3, 2.0, 0.89, 0.4);
  EXPECT_DOUBLE_EQ(f.x, -2.0);
  EXPECT_EQ(f.y, 0.0);
}

TEST(Repulsion, RobotAtOneRangeBeyondContact) {
  const AgentState s = ped(1, {0, 0}, {1, 0}, {10, 0});
  const Vec2 f = forces::repulsion_force(s, {1.59, 0}, 0.3, 7.93, 0.99, 0.4);
  EXPECT_NEAR(norm(f), 7.93 * std::exp(-1.0), 1e-12 * 2.917);
  EXPECT_NEAR(norm(f), 2.9172839684895377, 1e-12 * 2.917);
}

TEST(Repulsion, RearSourceScaledByLambda) {
  const AgentState s = ped(1, {0, 0}, {1, 0}, {10, 0});
  const Vec2 front = forces::repulsion_force(s, {1.2, 0}, 0.3, 2.0, 0.89, 0.4);
  const Vec2 rear = forces::repulsion_force(s, {-1.2, 0}, 0.3, 2.0, 0.89, 0.4);
  EXPECT_NEAR(norm(rear), 0.4 * norm(front), 1e-15);
  EXPECT_GT(rear.x, 0.0);
  EXPECT_LT(front.x, 0.0);
}

TEST(Repulsion, IsotropicSwitchIgnoresAngle) {
  const AgentState s = ped(1, {0, 0}, {1, 0}, {10, 0});
  const Vec2 rear = forces::repulsion_force(s, {-1.2, 0}, 0.3, 2.0, 0.89, 0.4, -1, false);
  EXPECT_DOUBLE_EQ(norm(rear), 2.0 * std::exp((0.6 - 1.2) / 0.89));
}

TEST(Repulsion, HeadingFallsBackToGoalWhenStill) {
  // Standing still, goal along +y; source on +y is in front.
  const AgentState s = ped(1, {0, 0}, {0, 0}, {0, 5});
  const Vec2 f = forces::repulsion_force(s, {0, 1}, 0.3, 2.0, 0.89, 0.4);
  EXPECT_DOUBLE_EQ(f.y, -2.0 * std::exp((0.6 - 1.0) / 0.89));
}

TEST(Repulsion, StrictlyDecreasingInDistance) {
  const AgentState s = ped(1, {0, 0}, {1, 0}, {10, 0});
  double prev = INFINITY;
  for (int i = 1; i <= 60; ++i) {
    const double m = norm(forces::repulsion_force(s, {0.1 * i, 0.05 * i}, 0.3, 2.0, 0.89, 0.4));
    EXPECT_LT(m, prev);
    prev = m;
  }
}

TEST(Repulsion, OverlapIsFiniteAndAntisymmetric) {
  const AgentState a = ped(3, {1, 1}, {0, 0}, {1, 1});
  const AgentState b = ped(8, {1, 1}, {0, 0}, {1, 1});
  const Vec2 fa = forces::repulsion_force(a, b.position, 0.3, 2.0, 0.89, 0.4, b.id);
  const Vec2 fb = forces::repulsion_force(b, a.position, 0.3, 2.0, 0.89, 0.4, a.id);
  EXPECT_TRUE(is_finite(fa));
  EXPECT_NEAR(norm(fa), 2.0, 1e-12);
  EXPECT_EQ(fa, -fb);
  EXPECT_EQ(forces::overlap_direction(3, 8), forces::overlap_direction(3, 8));
}

TEST(TotalForce, EquilibriumAlone) {
  const AgentState s = ped(1, {0, 0}, {1, 0}, {10, 0});
  const ForceBreakdown f = forces::total_force(s, {}, nullptr, {}, {}, true);
  EXPECT_EQ(f.total, (Vec2{0.0, 0.0}));
}

TEST(TotalForce, SumOrderAndParts) {
  const AgentState s = ped(1, {0, 0}, {0.5, 0.1}, {10, 0});
  const std::vector<AgentState> others = {ped(2, {1, 0.5}, {0, 0}, {0, 0}), ped(3, {-0.5, 1}, {0, 0}, {0, 0})};
  AgentState robot = ped(0, {1.5, -0.5}, {0, 0}, {0, 0});
  const std::vector<Obstacle> obstacles = {{{0, -2}, 0.5}};
  const SrfmParams p;
  const ForceBreakdown f = forces::total_force(s, others, &robot, obstacles, p, true);
  EXPECT_EQ(f.total, f.attraction + f.pedestrian_repulsion + f.obstacle_repulsion + f.robot_repulsion);
  EXPECT_EQ(f.robot_repulsion, forces::repulsion_force(s, robot.position, 0.3, p.A_r, p.B_r, p.lambda, 0));
  EXPECT_EQ(f.pedestrian_repulsion,
            forces::repulsion_force(s, others[0].position, 0.3, p.A_p, p.B_p, p.lambda, 2) +
                forces::repulsion_force(s, others[1].position, 0.3, p.A_p, p.B_p, p.lambda, 3));
}

TEST(TotalForce, RobotFlagDisablesOnlyRobotTerm) {
  const AgentState s = ped(1, {0, 0}, {0.5, 0.1}, {10, 0});
  const std::vector<AgentState> others = {ped(2, {1, 0.5}, {0, 0}, {0, 0})};
  AgentState robot = ped(0, {1.5, -0.5}, {0, 0}, {0, 0});
  const ForceBreakdown off = forces::total_force(s, others, &robot, {}, {}, false);
  const ForceBreakdown none = forces::total_force(s, others, nullptr, {}, {}, true);
  EXPECT_EQ(off.robot_repulsion, (Vec2{0.0, 0.0}));
  EXPECT_EQ(off.total, none.total);
  EXPECT_EQ(off.total, off.attraction + off.pedestrian_repulsion);
}

TEST(TotalForce, MirrorNeighborsCancelLaterally) {
  const AgentState s = ped(1, {0, 0}, {1, 0}, {10, 0});
  const std::vector<AgentState> others = {ped(2, {1, 0.7}, {0, 0}, {0, 0}), ped(3, {1, -0.7}, {0, 0}, {0, 0})};
  const ForceBreakdown f = forces::total_force(s, others, nullptr, {}, {}, true);
  EXPECT_EQ(f.pedestrian_repulsion.y, 0.0);
  EXPECT_LT(f.pedestrian_repulsion.x, 0.0);
}

TEST(TotalForce, SelfSkippedAndOrderIndependent) {
  const AgentState s = ped(2, {0, 0}, {1, 0}, {10, 0});
  std::vector<AgentState> a = {ped(1, {1, 0.3}, {0, 0}, {0, 0}), s, ped(4, {0.4, -1}, {0, 0}, {0, 0}),
                               ped(7, {-1, 0.2}, {0, 0}, {0, 0})};
  std::vector<AgentState> b = {a[3], a[0], a[2], a[1]};
  const ForceBreakdown fa = forces::total_force(s, a, nullptr, {}, {}, true);
  const ForceBreakdown fb = forces::total_force(s, b, nullptr, {}, {}, true);
  EXPECT_EQ(fa.total, fb.total);
}

TEST(TotalForce, NeighborCutoff) {
  const AgentState s = ped(1, {0, 0}, {1, 0}, {10, 0});
  const std::vector<AgentState> far = {ped(2, {10.5, 0}, {0, 0}, {0, 0})};
  AgentState robot = ped(0, {-11, 0}, {0, 0}, {0, 0});
  const ForceBreakdown f = forces::total_force(s, far, &robot, {}, {}, true);
  EXPECT_EQ(f.pedestrian_repulsion, (Vec2{0.0, 0.0}));
  EXPECT_EQ(f.robot_repulsion, (Vec2{0.0, 0.0}));
}

}  // namespace
}  // namespace srfm
