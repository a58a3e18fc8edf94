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

#include "srfm/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "srfm/transport.hpp"

namespace srfm::policies {
namespace {

Vec2 slot_position(const PedestrianSlot& slot) {
  return {slot.distance * std::cos(slot.angle), slot.distance * std::sin(slot.angle)};
}

Vec2 goal_position(const Observation& obs) {
  return {obs.goal_distance * std::cos(obs.goal_angle), obs.goal_distance * std::sin(obs.goal_angle)};
}

double sample_at(double lo, double hi, int i, int n) {
  if (n <= 1) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

std::vector<Track> PedestrianTracker::update(const Observation& obs) {
  std::vector<Track> tracks;
  for (const PedestrianSlot& slot : obs.pedestrians) {
    if (slot.valid) tracks.push_back({slot_position(slot), {}, false});
  }

  // Move the previous detections into the current body frame.
  const double dtheta = obs.last_action.w * dt_;
  const Vec2 shift = Vec2{std::cos(dtheta), std::sin(dtheta)} * (obs.last_action.v * dt_);
  std::vector<Vec2> prev;
  prev.reserve(previous_.size());
  for (Vec2 q : previous_) prev.push_back(rotate(q - shift, -dtheta));

  struct Pair {
    double d;
    std::size_t cur;
    std::size_t old;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (std::size_t j = 0; j < prev.size(); ++j) {
      const double d = distance(tracks[i].position, prev[j]);
      if (d <= gate_) pairs.push_back({d, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.d != b.d) return a.d < b.d;
    return a.cur != b.cur ? a.cur < b.cur : a.old < b.old;
  });
  std::vector<bool> cur_used(tracks.size(), false);
  std::vector<bool> old_used(prev.size(), false);
  for (const Pair& p : pairs) {
    if (cur_used[p.cur] || old_used[p.old]) continue;
    cur_used[p.cur] = old_used[p.old] = true;
    tracks[p.cur].velocity = (tracks[p.cur].position - prev[p.old]) / dt_;
    tracks[p.cur].has_velocity = true;
  }

  previous_.clear();
  for (const Track& t : tracks) previous_.push_back(t.position);
  return tracks;
}

Action GoalSeekPolicy::act(const Observation& obs, const StepFeedback&) {
  const double w = std::clamp(config_.turn_gain * obs.goal_angle, -kPi, kPi);
  const double v = 0.5 * std::max(0.0, std::cos(obs.goal_angle));
  return {v, w};
}

Action ReplayPolicy::act(const Observation&, const StepFeedback&) {
  Action a;
  if (next_ < actions_.size()) {
    a.v = actions_[next_].v;
    a.w = actions_[next_].w;
    ++next_;
  }
  return a;
}

DwaPolicy::DwaPolicy(DwaConfig config, PolicyContext context)
    : config_(config), context_(context), tracker_(context.dt) {
  if (config_.v_samples < 1 || config_.w_samples < 1 || !(config_.rollout_step > 0.0) ||
      !(config_.horizon > 0.0)) {
    throw Error("invalid DWA configuration");
  }
}

DwaPolicy::Choice DwaPolicy::choose(const Observation& obs, const std::vector<Track>& tracks) const {
  const ActionBounds& b = context_.bounds;
  const double v_lo = std::max(b.v_min, obs.last_action.v - config_.max_accel * context_.dt);
  const double v_hi = std::min(b.v_max, obs.last_action.v + config_.max_accel * context_.dt);
  const double w_lo = std::max(b.w_min, obs.last_action.w - config_.max_angular_accel * context_.dt);
  const double w_hi = std::min(b.w_max, obs.last_action.w + config_.max_angular_accel * context_.dt);

  std::vector<Track> near;
  for (const Track& t : tracks) {
    if (norm(t.position) <= config_.detection_range) near.push_back(t);
  }
  const Vec2 goal = goal_position(obs);
  const int steps = std::max(1, static_cast<int>(std::lround(config_.horizon / config_.rollout_step)));
  const double limit = context_.collision_distance + config_.safety_margin;

  Choice best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int iv = 0; iv < config_.v_samples; ++iv) {
    const double v = sample_at(v_lo, v_hi, iv, config_.v_samples);
    for (int iw = 0; iw < config_.w_samples; ++iw) {
      const double w = sample_at(w_lo, w_hi, iw, config_.w_samples);
      Vec2 p{0.0, 0.0};
      double theta = 0.0;
      double clearance = std::numeric_limits<double>::infinity();
      for (int k = 1; k <= steps; ++k) {
        theta += w * config_.rollout_step;
        p += Vec2{std::cos(theta), std::sin(theta)} * (v * config_.rollout_step);
        const double t = k * config_.rollout_step;
        for (const Track& ped : near) {
          const Vec2 q = ped.position + (ped.has_velocity ? ped.velocity * t : Vec2{});
          clearance = std::min(clearance, distance(p, q));
        }
      }
      if (!(clearance > limit)) continue;

      const Vec2 to_goal = goal - p;
      const double heading =
          norm(to_goal) < kEpsilon ? 1.0 : 1.0 - std::abs(wrap_angle(std::atan2(to_goal.y, to_goal.x) - theta)) / kPi;
      const double clear = std::min(clearance, config_.clearance_cap) / config_.clearance_cap;
      const double speed = b.v_max > 0.0 ? v / b.v_max : 0.0;
      const double score =
          config_.heading_weight * heading + config_.clearance_weight * clear + config_.speed_weight * speed;
      if (score > best_score) {
        best_score = score;
        best.action = {v, w};
        best.clearance = clearance;
        best.admissible = true;
      }
    }
  }
  if (!best.admissible) {
    best.action = {0.0, obs.goal_angle >= 0.0 ? b.w_max : b.w_min};
  }
  return best;
}

Action DwaPolicy::act(const Observation& obs, const StepFeedback&) {
  return choose(obs, tracker_.update(obs)).action;
}

bool in_velocity_obstacle(Vec2 u, const VelocityObstacle& vo, double horizon) {
  const Vec2 rel = u - vo.velocity;
  const double p2 = dot(vo.position, vo.position);
  const double r2 = vo.radius * vo.radius;
  const double closing = dot(rel, vo.position);
  if (p2 <= r2) return closing > 0.0;  // already overlapping: any approach is a collision
  if (closing <= 0.0) return false;
  const double rel2 = dot(rel, rel);
  const double disc = closing * closing - rel2 * (p2 - r2);
  if (disc <= 0.0) return false;
  const double t_hit = (closing - std::sqrt(disc)) / rel2;
  return t_hit < horizon;
}

VoPolicy::VoPolicy(VoConfig config, PolicyContext context)
    : config_(config), context_(context), tracker_(context.dt) {
  if (!(config_.detection_range > 0.0)) throw Error("VO detection_range must be > 0");
  if (config_.speed_samples < 1 || config_.heading_samples < 1) throw Error("invalid VO sampling");
}

std::vector<VelocityObstacle> VoPolicy::obstacles(const std::vector<Track>& tracks) const {
  std::vector<VelocityObstacle> cones;
  for (const Track& t : tracks) {
    if (norm(t.position) > config_.detection_range) continue;
    cones.push_back({t.position, t.has_velocity ? t.velocity : Vec2{},
                     context_.collision_distance + config_.safety_margin});
  }
  return cones;
}

std::optional<Vec2> VoPolicy::select_velocity(const Observation& obs,
                                              const std::vector<VelocityObstacle>& cones) const {
  const double v_max = context_.bounds.v_max;
  const Vec2 preferred = Vec2{std::cos(obs.goal_angle), std::sin(obs.goal_angle)} * v_max;
  auto admissible = [&](Vec2 u) {
    return std::none_of(cones.begin(), cones.end(),
                        [&](const VelocityObstacle& c) { return in_velocity_obstacle(u, c, config_.time_horizon); });
  };

  std::optional<Vec2> best;
  double best_cost = std::numeric_limits<double>::infinity();
  auto consider = [&](Vec2 u) {
    const double cost = distance(u, preferred);
    if (cost < best_cost && admissible(u)) {
      best_cost = cost;
      best = u;
    }
  };
  consider(preferred);
  for (int s = config_.speed_samples; s >= 1; --s) {
    const double speed = v_max * s / config_.speed_samples;
    for (int j = 0; j < config_.heading_samples; ++j) {
      const double angle = obs.goal_angle + 2.0 * kPi * j / config_.heading_samples;
      consider(Vec2{std::cos(angle), std::sin(angle)} * speed);
    }
  }
  consider({0.0, 0.0});
  return best;
}

Action VoPolicy::to_command(Vec2 u) const {
  const UnitNorm un = unit_and_norm(u);
  if (un.norm == 0.0) return {};
  const double alpha = std::atan2(u.y, u.x);
  const double w = std::clamp(config_.turn_gain * alpha, context_.bounds.w_min, context_.bounds.w_max);
  const double v = std::clamp(un.norm * std::max(0.0, std::cos(alpha)), context_.bounds.v_min, context_.bounds.v_max);
  return {v, w};
}

Action VoPolicy::act(const Observation& obs, const StepFeedback&) {
  const std::vector<Track> tracks = tracker_.update(obs);
  last_velocity_ = select_velocity(obs, obstacles(tracks));
  if (!last_velocity_) return {};
  return to_command(*last_velocity_);
}

std::unique_ptr<Policy> make_policy(const std::string& spec, const PolicyContext& context,
                                    const PolicyConfigs& configs) {
  if (spec == "goal_seek") return std::make_unique<GoalSeekPolicy>(configs.goal_seek);
  if (spec == "stand_still") return std::make_unique<StandStillPolicy>();
  if (spec == "dwa") return std::make_unique<DwaPolicy>(configs.dwa, context);
  if (spec == "vo") return std::make_unique<VoPolicy>(configs.vo, context);
  constexpr std::string_view kExternal = "external:";
  if (spec.rfind(kExternal, 0) == 0) {
    return transport::make_external_policy(spec.substr(kExternal.size()), configs.transport_timeout);
  }
  throw Error("unknown policy '" + spec + "'");
}

}  // namespace srfm::policies
