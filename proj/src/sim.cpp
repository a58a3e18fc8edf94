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

#include "srfm/sim.hpp"

#include <algorithm>
#include <cmath>

namespace srfm {

void validate(const SimConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("invalid simulation config: ") + what);
  };
  require(c.dt > 0.0 && std::isfinite(c.dt), "dt must be > 0");
  require(c.max_steps >= 1, "max_steps must be >= 1");
  require(c.speed_cap > 0.0, "speed_cap must be > 0");
  require(c.goal_radius > 0.0, "goal_radius must be > 0");
  require(c.collision_distance >= 0.0, "collision_distance must be >= 0");
  require(c.social_zone_radius > 0.0, "social_zone_radius must be > 0");
  require(c.robot_bounds.v_min <= c.robot_bounds.v_max && c.robot_bounds.w_min <= c.robot_bounds.w_max,
          "robot bounds are inverted");
  validate(c.params);
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::goal_reached: return "goal_reached";
    case EventKind::goal_reassigned: return "goal_reassigned";
    case EventKind::collision: return "collision";
    case EventKind::robot_success: return "robot_success";
    case EventKind::timeout: return "timeout";
  }
  return "unknown";
}

EventKind parse_event_kind(std::string_view name) {
  for (EventKind k : {EventKind::goal_reached, EventKind::goal_reassigned, EventKind::collision,
                      EventKind::robot_success, EventKind::timeout}) {
    if (to_string(k) == name) return k;
  }
  throw Error("unknown event kind '" + std::string(name) + "'");
}

Trajectory EpisodeRecord::pedestrian_trajectory(std::size_t index) const {
  Trajectory traj;
  if (frames.empty()) return traj;
  traj.agent_id = frames.front().pedestrians.at(index).id;
  traj.samples.reserve(frames.size());
  for (const Frame& f : frames) traj.samples.push_back({f.t, f.pedestrians.at(index).position});

  const Vec2 final_goal = frames.back().pedestrians.at(index).goal;
  std::optional<std::size_t> entry;
  for (std::size_t k = frames.size(); k-- > 0;) {
    const AgentState& p = frames[k].pedestrians[index];
    if (p.goal != final_goal || distance(p.position, p.goal) > config.goal_radius) break;
    entry = k;
  }
  if (entry) traj.goal_reached_at = frames[*entry].t;
  return traj;
}

std::vector<Trajectory> EpisodeRecord::pedestrian_trajectories() const {
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < pedestrian_count(); ++i) out.push_back(pedestrian_trajectory(i));
  return out;
}

Trajectory EpisodeRecord::robot_trajectory() const {
  Trajectory traj;
  traj.agent_id = sim::kRobotId;
  for (const Frame& f : frames) {
    if (f.robot) traj.samples.push_back({f.t, f.robot->position});
  }
  for (const Event& e : events) {
    if (e.kind == EventKind::robot_success) traj.goal_reached_at = e.t;
  }
  return traj;
}

namespace sim {
namespace {

Vec2 clamp_norm(Vec2 v, double cap) {
  const double n = norm(v);
  if (n > cap) return v * (cap / n);
  return v;
}

}  // namespace

std::vector<AgentState> step_pedestrians(std::span<const AgentState> states, const AgentState* robot,
                                         std::span<const Obstacle> obstacles, const SimConfig& config) {
  std::vector<AgentState> next(states.begin(), states.end());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const AgentState& s = states[i];
    const ForceBreakdown f =
        forces::total_force(s, states, robot, obstacles, config.params, config.robot_force_enabled);
    const Vec2 v = clamp_norm(s.velocity + f.total * config.dt, config.speed_cap);
    next[i].velocity = v;
    next[i].position = s.position + v * config.dt;
  }
  return next;
}

AgentState step_robot(const AgentState& robot, Action action, const SimConfig& config) {
  const Action a = action.clamped(config.robot_bounds);
  AgentState next = robot;
  next.heading = robot.heading + a.w * config.dt;
  const Vec2 dir{std::cos(next.heading), std::sin(next.heading)};
  next.velocity = dir * a.v;
  next.position = robot.position + next.velocity * config.dt;
  return next;
}

AgentState initial_robot(const Scenario& scenario) {
  AgentState r;
  r.id = kRobotId;
  r.kind = AgentKind::robot;
  r.position = scenario.robot_start;
  r.goal = scenario.robot_goal;
  r.radius = scenario.robot_radius;
  r.desired_speed = 0.0;
  r.heading = scenario.robot_heading;
  return r;
}

std::vector<AgentState> initial_pedestrians(const Scenario& scenario) {
  std::vector<AgentState> out;
  out.reserve(scenario.pedestrians.size());
  int id = kRobotId + 1;
  for (const PedestrianSpec& spec : scenario.pedestrians) {
    AgentState p;
    p.id = id++;
    p.kind = AgentKind::pedestrian;
    p.position = spec.start;
    p.goal = spec.goal;
    p.radius = scenario.pedestrian_radius;
    p.desired_speed = spec.desired_speed;
    // Pedestrians enter the scene already walking at their desired velocity.
    p.velocity = forces::desired_velocity(p);
    out.push_back(p);
  }
  return out;
}

Episode::Episode(const Scenario& scenario, const SimConfig& config, const RngStream& rng, EpisodeOptions options)
    : config_(config),
      options_(options),
      scenario_(scenario),
      reassign_(scenario.reassign_goals && config.reassign_goals),
      robot_(initial_robot(scenario)),
      pedestrians_(initial_pedestrians(scenario)) {
  validate(config_);
  if (options_.fixed_steps && *options_.fixed_steps < 0) throw Error("fixed_steps must be >= 0");

  record_.config = config_;
  record_.scenario = scenario_;
  record_.seed = rng.seed();

  for (const AgentState& p : pedestrians_) {
    validate(p);
    goal_rngs_.push_back(rng.substream(static_cast<std::uint64_t>(p.id)));
    cruise_speed_.push_back(p.desired_speed);
    const bool inside = distance(p.position, p.goal) <= config_.goal_radius;
    inside_goal_.push_back(inside);
    holding_.push_back(inside);
    if (inside) record_.events.push_back({0.0, EventKind::goal_reached, p.id});
  }
  start_goal_distance_ = distance(robot_.position, robot_.goal);

  Frame f;
  f.step = 0;
  f.t = 0.0;
  if (options_.robot_present) f.robot = robot_;
  f.pedestrians = pedestrians_;
  record_.frames.push_back(std::move(f));

  check_terminal();
  if (done_) {
    feedback_.reward = counterfactual::reward(
        {outcome_, distance(robot_.position, robot_.goal), start_goal_distance_, 0.0}, config_.reward);
    feedback_.done = true;
  }
  refresh_observation();
}

void Episode::finish(Outcome outcome, int agent_id) {
  done_ = true;
  outcome_ = outcome;
  record_.outcome = outcome;
  const double t = step_ * config_.dt;
  switch (outcome) {
    case Outcome::success: record_.events.push_back({t, EventKind::robot_success, kRobotId}); break;
    case Outcome::collision: record_.events.push_back({t, EventKind::collision, agent_id}); break;
    case Outcome::timeout: record_.events.push_back({t, EventKind::timeout, -1}); break;
  }
}

void Episode::check_terminal() {
  const bool fixed = options_.fixed_steps.has_value();
  if (fixed && step_ < *options_.fixed_steps) return;
  if (options_.robot_present) {
    for (const AgentState& p : pedestrians_) {
      if (distance(p.position, robot_.position) < config_.collision_distance) {
        finish(Outcome::collision, p.id);
        return;
      }
    }
    if (distance(robot_.position, robot_.goal) <= config_.goal_radius) {
      finish(Outcome::success);
      return;
    }
  }
  if (fixed || step_ >= config_.max_steps) finish(Outcome::timeout);
}

void Episode::refresh_observation() {
  observation_ = build_observation(robot_, pedestrians_, robot_.goal, last_action_,
                                   outcome_ == Outcome::success, done_, config_.social_zone_radius);
}

const StepFeedback& Episode::step(Action action) {
  if (done_) throw Error("episode already finished");
  const Action a = action.clamped(config_.robot_bounds);
  const double t_issue = step_ * config_.dt;
  const AgentState* robot = options_.robot_present ? &robot_ : nullptr;

  if (robot != nullptr) robot_ = step_robot(robot_, a, config_);

  for (std::size_t i = 0; i < pedestrians_.size(); ++i) {
    AgentState& p = pedestrians_[i];
    p.desired_speed = cruise_speed_[i];
    // Arrived pedestrians hold their spot: a speed proportional to the
    // offset pulls them back without overshooting.
    if (holding_[i]) p.desired_speed = std::min(cruise_speed_[i], distance(p.position, p.goal) / config_.params.tau);
  }

  std::vector<AgentState> next = step_pedestrians(pedestrians_, robot, scenario_.obstacles, config_);
  const double divergence =
      robot != nullptr ? counterfactual::divergence_penalty(pedestrians_, robot_, config_.params, config_.dt,
                                                            config_.reward.penalty_zone, scenario_.obstacles)
                       : 0.0;
  pedestrians_ = std::move(next);
  ++step_;
  const double t = step_ * config_.dt;
  last_action_ = a;
  record_.actions.push_back({t_issue, a.v, a.w});

  for (std::size_t i = 0; i < pedestrians_.size(); ++i) {
    AgentState& p = pedestrians_[i];
    bool inside = distance(p.position, p.goal) <= config_.goal_radius;
    if (inside && !inside_goal_[i]) record_.events.push_back({t, EventKind::goal_reached, p.id});
    if (inside && reassign_) {
      p.goal = scenarios::sample_goal(goal_rngs_[i], scenario_.bounds, p.position, scenario_.robot_goal,
                                      config_.scenario_constants);
      record_.events.push_back({t, EventKind::goal_reassigned, p.id});
      inside = false;
      holding_[i] = false;
    } else if (inside) {
      holding_[i] = true;
    }
    inside_goal_[i] = inside;
  }

  Frame f;
  f.step = step_;
  f.t = t;
  if (robot != nullptr) f.robot = robot_;
  f.pedestrians = pedestrians_;
  record_.frames.push_back(std::move(f));

  check_terminal();
  feedback_.step = step_;
  feedback_.done = done_;
  feedback_.reward = counterfactual::reward(
      {done_ ? outcome_ : std::nullopt, distance(robot_.position, robot_.goal), start_goal_distance_, divergence},
      config_.reward);
  refresh_observation();
  return feedback_;
}

EpisodeRecord run_episode(const Scenario& scenario, Policy& policy, const SimConfig& config, const RngStream& rng,
                          EpisodeOptions options) {
  Episode episode(scenario, config, rng, options);
  policy.reset({to_string(scenario.id), scenario.seed, 0});
  while (!episode.done()) {
    const Action a = policy.act(episode.observation(), episode.last_feedback());
    episode.step(a);
  }
  policy.finish(episode.observation(), episode.last_feedback());
  return episode.take_record();
}

}  // namespace sim
}  // namespace srfm
