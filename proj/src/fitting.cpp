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

#include "srfm/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Cholesky>

#include "json.hpp"

namespace srfm {

namespace {

constexpr int kDatasetRobotId = -1;

}  // namespace

std::string to_string(FitMode mode) {
  switch (mode) {
    case FitMode::pedestrian_only: return "pedestrian_only";
    case FitMode::robot_as_pedestrian: return "robot_as_pedestrian";
    case FitMode::robot_force: return "robot_force";
  }
  return "?";
}

FitMode parse_fit_mode(std::string_view name) {
  if (name == "pedestrian_only") return FitMode::pedestrian_only;
  if (name == "robot_as_pedestrian") return FitMode::robot_as_pedestrian;
  if (name == "robot_force") return FitMode::robot_force;
  throw Error("unknown fit mode '" + std::string(name) + "'");
}

std::string to_string(TrajectoryClass c) {
  switch (c) {
    case TrajectoryClass::interaction: return "interaction";
    case TrajectoryClass::non_interaction: return "non_interaction";
    case TrajectoryClass::discarded: return "discarded";
  }
  return "?";
}

std::int64_t Recording::time_key(double t) { return std::llround(t * 1e6); }

Recording::Recording(std::string id, std::vector<Trajectory> pedestrians, std::optional<Trajectory> robot)
    : id_(std::move(id)), pedestrians_(std::move(pedestrians)), robot_(std::move(robot)) {
  std::vector<const Trajectory*> order;
  for (const Trajectory& tr : pedestrians_) order.push_back(&tr);
  std::sort(order.begin(), order.end(),
            [](const Trajectory* a, const Trajectory* b) { return a->agent_id < b->agent_id; });
  for (const Trajectory* tr : order) {
    for (const TrajectorySample& s : tr->samples) by_time_[time_key(s.t)].emplace_back(tr->agent_id, s.position);
  }
  if (robot_) {
    for (const TrajectorySample& s : robot_->samples) robot_by_time_[time_key(s.t)] = s.position;
  }
}

std::span<const std::pair<int, Vec2>> Recording::pedestrians_at(double t) const {
  const auto it = by_time_.find(time_key(t));
  if (it == by_time_.end()) return {};
  return it->second;
}

std::optional<Vec2> Recording::robot_at(double t) const {
  const auto it = robot_by_time_.find(time_key(t));
  if (it == robot_by_time_.end()) return std::nullopt;
  return it->second;
}

std::vector<DatasetTrajectory> build_dataset(
    const std::vector<std::pair<std::string, std::vector<RawAgent>>>& recordings,
    const std::map<std::string, Trajectory>& robots, const DatasetOptions& options) {
  std::vector<DatasetTrajectory> out;
  for (const auto& [rec_id, agents] : recordings) {
    const auto robot_it = robots.find(rec_id);
    if (options.classify && robot_it == robots.end()) {
      throw Error("recording '" + rec_id + "' has no robot track");
    }
    std::vector<Trajectory> tracks;
    for (const RawAgent& a : agents) {
      validate(a.trajectory);
      tracks.push_back(a.trajectory);
    }
    std::optional<Trajectory> robot;
    if (robot_it != robots.end()) {
      validate(robot_it->second);
      robot = robot_it->second;
    }
    auto rec = std::make_shared<const Recording>(rec_id, std::move(tracks), std::move(robot));

    for (const RawAgent& a : agents) {
      DatasetTrajectory d;
      d.recording = rec;
      d.trajectory = a.trajectory;
      const auto& s = d.trajectory.samples;
      const std::size_t n = s.size();
      d.velocities.assign(n, Vec2{});
      for (std::size_t k = 1; k < n; ++k) {
        d.velocities[k] = (s[k].position - s[k - 1].position) / (s[k].t - s[k - 1].t);
      }
      if (n >= 2) d.velocities[0] = d.velocities[1];

      d.goal = a.goal.value_or(n ? s.back().position : Vec2{});
      if (a.desired_speed) {
        d.desired_speed = *a.desired_speed;
      } else if (n >= 2) {
        double sum = 0.0;
        for (std::size_t k = 1; k < n; ++k) sum += norm(d.velocities[k]);
        d.desired_speed = sum / static_cast<double>(n - 1);
      }

      d.min_robot_distance = std::numeric_limits<double>::infinity();
      for (const TrajectorySample& sample : s) {
        if (const auto r = rec->robot_at(sample.t)) {
          d.min_robot_distance = std::min(d.min_robot_distance, distance(sample.position, *r));
        }
      }
      if (d.trajectory.duration() < options.min_duration) {
        d.cls = TrajectoryClass::discarded;
      } else if (d.min_robot_distance > options.interaction_distance) {
        d.cls = TrajectoryClass::non_interaction;
      } else {
        d.cls = TrajectoryClass::interaction;
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

namespace {

struct Row {
  std::string recording;
  int agent = 0;
  double t = 0.0;
  Vec2 position;
  bool is_robot = false;
  std::optional<double> goal_x;
  std::optional<double> goal_y;
  std::optional<double> desired_speed;
};

struct RowSink {
  std::map<std::string, std::map<int, RawAgent>> agents;
  std::map<std::string, Trajectory> robots;
  std::map<std::string, int> robot_ids;
  std::vector<std::string> order;

  void add(const Row& row, std::size_t line) {
    auto fail = [&](const std::string& what) {
      throw Error("line " + std::to_string(line) + ": " + what);
    };
    if (!std::isfinite(row.t) || !is_finite(row.position)) fail("non-finite value");
    if (!agents.count(row.recording) && !robots.count(row.recording)) order.push_back(row.recording);
    Trajectory* tr;
    if (row.is_robot) {
      auto [it, inserted] = robot_ids.emplace(row.recording, row.agent);
      if (!inserted && it->second != row.agent) fail("second robot in recording '" + row.recording + "'");
      tr = &robots[row.recording];
      tr->agent_id = row.agent;
    } else {
      RawAgent& a = agents[row.recording][row.agent];
      a.trajectory.agent_id = row.agent;
      if (row.goal_x.has_value() != row.goal_y.has_value()) fail("goal_x and goal_y must appear together");
      if (row.goal_x) a.goal = Vec2{*row.goal_x, *row.goal_y};
      if (row.desired_speed) a.desired_speed = *row.desired_speed;
      tr = &a.trajectory;
    }
    if (!tr->samples.empty() && !(row.t > tr->samples.back().t)) {
      fail("timestamps of agent " + std::to_string(row.agent) + " are not strictly increasing");
    }
    tr->samples.push_back({row.t, row.position});
  }

  std::vector<DatasetTrajectory> finish(const DatasetOptions& options) {
    std::vector<std::pair<std::string, std::vector<RawAgent>>> recs;
    std::sort(order.begin(), order.end());
    for (const std::string& id : order) {
      std::vector<RawAgent> list;
      for (auto& [agent_id, raw] : agents[id]) list.push_back(std::move(raw));
      recs.emplace_back(id, std::move(list));
    }
    return build_dataset(recs, robots, options);
  }
};

double json_number(const nlohmann::json& j, const char* key, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw Error("line " + std::to_string(line) + ": missing or non-numeric '" + key + "'");
  }
  return it->get<double>();
}

std::optional<double> json_optional(const nlohmann::json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return json_number(j, key, line);
}

Row parse_json_row(const nlohmann::json& j, std::size_t line) {
  auto fail = [&](const std::string& what) { throw Error("line " + std::to_string(line) + ": " + what); };
  static const std::set<std::string> kKnown = {"recording_id", "agent_id", "t",      "x",
                                               "y",            "is_robot", "goal_x", "goal_y",
                                               "desired_speed"};
  for (const auto& item : j.items()) {
    if (!kKnown.count(item.key())) fail("unknown key '" + item.key() + "'");
  }
  Row row;
  const auto rec = j.find("recording_id");
  if (rec == j.end()) fail("missing 'recording_id'");
  if (rec->is_string()) {
    row.recording = rec->get<std::string>();
  } else if (rec->is_number_integer()) {
    row.recording = std::to_string(rec->get<long long>());
  } else {
    fail("'recording_id' must be a string or integer");
  }
  const auto agent = j.find("agent_id");
  if (agent == j.end() || !agent->is_number_integer()) fail("missing or non-integer 'agent_id'");
  row.agent = agent->get<int>();
  row.t = json_number(j, "t", line);
  row.position = {json_number(j, "x", line), json_number(j, "y", line)};
  const auto robot = j.find("is_robot");
  if (robot == j.end()) fail("missing 'is_robot'");
  if (robot->is_boolean()) {
    row.is_robot = robot->get<bool>();
  } else if (robot->is_number_integer() && (robot->get<int>() == 0 || robot->get<int>() == 1)) {
    row.is_robot = robot->get<int>() == 1;
  } else {
    fail("'is_robot' must be a boolean");
  }
  row.goal_x = json_optional(j, "goal_x", line);
  row.goal_y = json_optional(j, "goal_y", line);
  row.desired_speed = json_optional(j, "desired_speed", line);
  return row;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const char* column, std::size_t line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error("line " + std::to_string(line) + ": bad number in column '" + column + "'");
  }
  return value;
}

}  // namespace

std::vector<DatasetTrajectory> ingest(const std::string& path, const std::string& format,
                                      const DatasetOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  const bool csv = format == "csv" || (format.empty() && path.size() >= 4 && path.substr(path.size() - 4) == ".csv");
  if (!format.empty() && format != "csv" && format != "jsonl") throw Error("unknown trajectory format '" + format + "'");

  RowSink sink;
  std::string line;
  std::size_t line_no = 0;
  if (csv) {
    std::map<std::string, std::size_t> columns;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto cells = split_csv(line);
      if (columns.empty()) {
        for (std::size_t i = 0; i < cells.size(); ++i) columns[cells[i]] = i;
        for (const char* required : {"recording_id", "agent_id", "t", "x", "y", "is_robot"}) {
          if (!columns.count(required)) throw Error(std::string("CSV header lacks column '") + required + "'");
        }
        continue;
      }
      if (cells.size() != columns.size()) throw Error("line " + std::to_string(line_no) + ": wrong column count");
      auto cell = [&](const char* name) -> const std::string& { return cells[columns.at(name)]; };
      auto optional = [&](const char* name) -> std::optional<double> {
        const auto it = columns.find(name);
        if (it == columns.end() || cells[it->second].empty()) return std::nullopt;
        return parse_number(cells[it->second], name, line_no);
      };
      Row row;
      row.recording = cell("recording_id");
      const double agent = parse_number(cell("agent_id"), "agent_id", line_no);
      if (agent != std::floor(agent)) throw Error("line " + std::to_string(line_no) + ": non-integer agent_id");
      row.agent = static_cast<int>(agent);
      row.t = parse_number(cell("t"), "t", line_no);
      row.position = {parse_number(cell("x"), "x", line_no), parse_number(cell("y"), "y", line_no)};
      const std::string& robot = cell("is_robot");
      if (robot == "1" || robot == "true") {
        row.is_robot = true;
      } else if (robot == "0" || robot == "false") {
        row.is_robot = false;
      } else {
        throw Error("line " + std::to_string(line_no) + ": bad is_robot value");
      }
      row.goal_x = optional("goal_x");
      row.goal_y = optional("goal_y");
      row.desired_speed = optional("desired_speed");
      sink.add(row, line_no);
    }
    if (columns.empty()) throw Error("'" + path + "' is empty");
  } else {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) throw Error("line " + std::to_string(line_no) + ": invalid JSON");
      if (j.contains("format")) {
        if (j.at("format") != "srfm-trajectories" || j.value("version", 0) != 1) {
          throw Error("unsupported trajectory file header");
        }
        continue;
      }
      sink.add(parse_json_row(j, line_no), line_no);
    }
  }
  return sink.finish(options);
}

void write_dataset(const std::string& path, std::span<const DatasetTrajectory> trajectories) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  char buf[256];
  out << "{\"format\":\"srfm-trajectories\",\"version\":1}\n";
  std::vector<const Recording*> written;
  for (const DatasetTrajectory& d : trajectories) {
    const std::string rec = nlohmann::json(d.recording->id()).dump();
    if (std::find(written.begin(), written.end(), d.recording.get()) == written.end()) {
      written.push_back(d.recording.get());
      if (const auto& robot = d.recording->robot()) {
        for (const TrajectorySample& s : robot->samples) {
          std::snprintf(buf, sizeof buf, "\"agent_id\":%d,\"t\":%.17g,\"x\":%.17g,\"y\":%.17g,\"is_robot\":true}",
                        robot->agent_id, s.t, s.position.x, s.position.y);
          out << "{\"recording_id\":" << rec << ',' << buf << '\n';
        }
      }
    }
    for (const TrajectorySample& s : d.trajectory.samples) {
      std::snprintf(buf, sizeof buf,
                    "\"agent_id\":%d,\"t\":%.17g,\"x\":%.17g,\"y\":%.17g,\"is_robot\":false,"
                    "\"goal_x\":%.17g,\"goal_y\":%.17g,\"desired_speed\":%.17g}",
                    d.trajectory.agent_id, s.t, s.position.x, s.position.y, d.goal.x, d.goal.y, d.desired_speed);
      out << "{\"recording_id\":" << rec << ',' << buf << '\n';
    }
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

std::vector<DatasetTrajectory> select(std::span<const DatasetTrajectory> all, TrajectoryClass cls) {
  std::vector<DatasetTrajectory> out;
  for (const DatasetTrajectory& d : all) {
    if (d.cls == cls) out.push_back(d);
  }
  return out;
}

namespace fitting {

int param_index(std::string_view name) {
  for (int i = 0; i < kParamCount; ++i) {
    if (name == kParamNames[i]) return i;
  }
  throw Error("unknown parameter '" + std::string(name) + "'");
}

ParamVector to_vector(const SrfmParams& p) {
  ParamVector v;
  v << p.A_p, p.B_p, p.lambda, p.tau, p.A_r, p.B_r;
  return v;
}

SrfmParams from_vector(const ParamVector& v, SrfmParams base) {
  base.A_p = v[0];
  base.B_p = v[1];
  base.lambda = v[2];
  base.tau = v[3];
  base.A_r = v[4];
  base.B_r = v[5];
  return base;
}

namespace {

AgentState subject_state(int id, Vec2 position, Vec2 velocity, Vec2 goal, double desired_speed, double radius) {
  AgentState s;
  s.id = id;
  s.kind = AgentKind::pedestrian;
  s.position = position;
  s.velocity = velocity;
  s.goal = goal;
  s.radius = radius;
  s.desired_speed = desired_speed;
  return s;
}

AgentState source_state(int id, AgentKind kind, Vec2 position, double radius) {
  AgentState s;
  s.id = id;
  s.kind = kind;
  s.position = position;
  s.radius = radius;
  return s;
}

/// Neighbors and robot of `id` at time t, as seen in the recording.
void context_at(const Recording& rec, double t, int id, const DatasetOptions& options,
                std::vector<AgentState>& neighbors, std::optional<AgentState>& robot) {
  neighbors.clear();
  for (const auto& [other, position] : rec.pedestrians_at(t)) {
    if (other != id) {
      neighbors.push_back(source_state(other, AgentKind::pedestrian, position, options.pedestrian_radius));
    }
  }
  robot.reset();
  if (const auto r = rec.robot_at(t)) robot = source_state(kDatasetRobotId, AgentKind::robot, *r, options.robot_radius);
}

Vec2 step_position(Vec2 position, Vec2 velocity, Vec2 force, double dt) {
  return position + (velocity + force * dt) * dt;
}

}  // namespace

std::vector<PredictionSample> prediction_samples(std::span<const DatasetTrajectory> trajectories,
                                                 const DatasetOptions& options) {
  std::vector<PredictionSample> out;
  for (const DatasetTrajectory& d : trajectories) {
    const auto& s = d.trajectory.samples;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
      PredictionSample p;
      p.subject = subject_state(d.trajectory.agent_id, s[k].position, d.velocities[k], d.goal, d.desired_speed,
                                options.pedestrian_radius);
      context_at(*d.recording, s[k].t, d.trajectory.agent_id, options, p.neighbors, p.robot);
      p.dt = s[k + 1].t - s[k].t;
      p.observed_next = s[k + 1].position;
      out.push_back(std::move(p));
    }
  }
  return out;
}

ForceJacobian model_force(const AgentState& subject, std::span<const AgentState> neighbors,
                          const AgentState* robot, const SrfmParams& params, FitMode mode) {
  ForceJacobian out;
  const Vec2 relax = forces::desired_velocity(subject) - subject.velocity;
  out.force = relax / params.tau;
  out.d[3] = relax * (-1.0 / (params.tau * params.tau));

  auto add = [&](const AgentState& source, double A, double B, int ia, int ib, bool anisotropic) {
    if (distance(subject.position, source.position) > kNeighborCutoff) return;
    const forces::RepulsionGeometry g = forces::repulsion_geometry(subject, source.position, source.radius, source.id);
    if (g.overlap) {
      out.force += g.direction * A;
      out.d[ia] += g.direction;
      return;
    }
    const double e = std::exp(g.gap / B);
    const double psi = anisotropic ? forces::anisotropy(g.phi, params.lambda) : 1.0;
    out.force += g.direction * (A * e * psi);
    out.d[ia] += g.direction * (e * psi);
    out.d[ib] += g.direction * (A * e * psi * (-g.gap / (B * B)));
    if (anisotropic) out.d[2] += g.direction * (A * e * (1.0 - (1.0 + std::cos(g.phi)) / 2.0));
  };

  // Same summation order as the simulator: attraction plus the pedestrian
  // sum, then the robot term.
  const Vec2 attraction = out.force;
  out.force = Vec2{};
  for (const AgentState& n : neighbors) add(n, params.A_p, params.B_p, 0, 1, params.anisotropic_pedestrians);
  if (robot != nullptr && mode == FitMode::robot_as_pedestrian) {
    add(*robot, params.A_p, params.B_p, 0, 1, params.anisotropic_pedestrians);
  }
  out.force = attraction + out.force;
  if (robot != nullptr && mode == FitMode::robot_force) {
    const Vec2 base = out.force;
    out.force = Vec2{};
    add(*robot, params.A_r, params.B_r, 4, 5, params.anisotropic_robot);
    out.force = base + out.force;
  }
  return out;
}

Vec2 predict(const PredictionSample& sample, const SrfmParams& params, FitMode mode) {
  const ForceJacobian f =
      model_force(sample.subject, sample.neighbors, sample.robot ? &*sample.robot : nullptr, params, mode);
  return step_position(sample.subject.position, sample.subject.velocity, f.force, sample.dt);
}

Eigen::VectorXd residuals(const SrfmParams& params, std::span<const PredictionSample> samples, FitMode mode) {
  Eigen::VectorXd r(2 * static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec2 e = predict(samples[i], params, mode) - samples[i].observed_next;
    r[2 * static_cast<Eigen::Index>(i)] = e.x;
    r[2 * static_cast<Eigen::Index>(i) + 1] = e.y;
  }
  return r;
}

Eigen::VectorXd residuals(const SrfmParams& params, std::span<const DatasetTrajectory> trajectories,
                          FitMode mode) {
  const auto samples = prediction_samples(trajectories);
  return residuals(params, samples, mode);
}

Eigen::MatrixXd jacobian(const SrfmParams& params, std::span<const PredictionSample> samples, FitMode mode) {
  Eigen::MatrixXd J(2 * static_cast<Eigen::Index>(samples.size()), kParamCount);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PredictionSample& s = samples[i];
    const ForceJacobian f = model_force(s.subject, s.neighbors, s.robot ? &*s.robot : nullptr, params, mode);
    const double dt2 = s.dt * s.dt;
    for (int c = 0; c < kParamCount; ++c) {
      J(2 * static_cast<Eigen::Index>(i), c) = f.d[c].x * dt2;
      J(2 * static_cast<Eigen::Index>(i) + 1, c) = f.d[c].y * dt2;
    }
  }
  return J;
}

FitStage parse_fit_stage(std::string_view name) {
  if (name == "pedestrian") return FitStage::pedestrian;
  if (name == "robot") return FitStage::robot;
  throw Error("unknown fit stage '" + std::string(name) + "'");
}

FitResult fit(std::span<const DatasetTrajectory> trajectories, FitStage stage, const SrfmParams& init,
              const FitOptions& options) {
  if (trajectories.empty()) throw Error("no trajectories to fit");
  const std::vector<PredictionSample> samples = prediction_samples(trajectories);
  if (samples.empty()) throw Error("trajectories too short to fit (need 3 samples)");

  const FitMode mode = stage == FitStage::pedestrian ? FitMode::pedestrian_only : FitMode::robot_force;
  std::set<int> frozen;
  for (const std::string& name : options.frozen) frozen.insert(param_index(name));
  std::vector<int> free;
  for (int i : stage == FitStage::pedestrian ? std::vector<int>{0, 1, 2, 3} : std::vector<int>{4, 5}) {
    if (!frozen.count(i)) free.push_back(i);
  }

  const ParamBounds& bounds = options.bounds;
  ParamVector x = to_vector(init).cwiseMax(bounds.lower).cwiseMin(bounds.upper);
  FitResult result;
  for (int i : free) result.fitted.emplace_back(kParamNames[i]);
  const auto k = static_cast<Eigen::Index>(free.size());

  auto eval = [&](const ParamVector& v) { return residuals(from_vector(v, init), samples, mode); };
  auto free_jacobian = [&](const ParamVector& v) {
    const Eigen::MatrixXd full = jacobian(from_vector(v, init), samples, mode);
    Eigen::MatrixXd J(full.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) J.col(c) = full.col(free[c]);
    return J;
  };

  Eigen::VectorXd r = eval(x);
  double cost = r.squaredNorm();
  result.initial_residual = cost;
  if (k == 0 || cost == 0.0) {
    result.params = from_vector(x, init);
    result.residual = cost;
    result.converged = true;
    result.stop_reason = k == 0 ? "nothing to fit" : "zero residual";
    return result;
  }

  Eigen::MatrixXd J = free_jacobian(x);
  Eigen::MatrixXd A = J.transpose() * J;
  Eigen::VectorXd g = J.transpose() * r;
  double mu = 1e-3 * std::max(A.diagonal().maxCoeff(), 1e-12);
  double nu = 2.0;
  result.stop_reason = "iteration limit";

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    Eigen::MatrixXd damped = A;
    damped.diagonal().array() += mu;
    const Eigen::VectorXd delta = damped.ldlt().solve(-g);
    ParamVector candidate = x;
    for (Eigen::Index c = 0; c < k; ++c) candidate[free[c]] += delta[c];
    candidate = candidate.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
    Eigen::VectorXd step(k);
    for (Eigen::Index c = 0; c < k; ++c) step[c] = candidate[free[c]] - x[free[c]];

    if (step.norm() < options.step_tolerance) {
      result.converged = true;
      result.stop_reason = "step below tolerance";
      break;
    }
    const Eigen::VectorXd r_new = eval(candidate);
    const double cost_new = r_new.squaredNorm();
    if (std::isfinite(cost_new) && cost_new < cost) {
      const double predicted = -(2.0 * step.dot(g) + step.dot(A * step));
      const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : 1.0;
      const double relative = (cost - cost_new) / cost;
      x = candidate;
      r = r_new;
      cost = cost_new;
      J = free_jacobian(x);
      A = J.transpose() * J;
      g = J.transpose() * r;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (relative < options.relative_decrease_tolerance || cost == 0.0) {
        result.converged = true;
        result.stop_reason = "relative decrease below tolerance";
        break;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu) || mu > 1e300) {
        result.stop_reason = "damping overflow";
        break;
      }
    }
  }

  result.params = from_vector(x, init);
  result.residual = cost;
  const auto dof = static_cast<double>(r.size()) - static_cast<double>(k);
  if (dof > 0.0) {
    const Eigen::MatrixXd cov = A.ldlt().solve(Eigen::MatrixXd::Identity(k, k)) * (cost / dof);
    for (Eigen::Index c = 0; c < k; ++c) {
      const double var = cov(c, c);
      result.half_width[free[c]] =
          var >= 0.0 && std::isfinite(var) ? 1.96 * std::sqrt(var) : std::numeric_limits<double>::infinity();
    }
  }
  return result;
}

TwoStageResult fit_two_stage(std::span<const DatasetTrajectory> dataset, const SrfmParams& init,
                             const FitOptions& options) {
  TwoStageResult out;
  const auto quiet = select(dataset, TrajectoryClass::non_interaction);
  const auto interacting = select(dataset, TrajectoryClass::interaction);
  out.pedestrian = fit(quiet, FitStage::pedestrian, init, options);
  out.robot = fit(interacting, FitStage::robot, out.pedestrian.params, options);
  return out;
}

std::vector<Vec2> rollout(const DatasetTrajectory& d, const SrfmParams& params, FitMode mode,
                          const DatasetOptions& options) {
  const auto& s = d.trajectory.samples;
  if (s.size() < 2) throw Error("rollout needs at least 2 samples");
  std::vector<Vec2> out;
  out.reserve(s.size() - 1);
  Vec2 position = s[1].position;
  Vec2 velocity = d.velocities[1];
  out.push_back(position);
  std::vector<AgentState> neighbors;
  std::optional<AgentState> robot;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const AgentState subject =
        subject_state(d.trajectory.agent_id, position, velocity, d.goal, d.desired_speed, options.pedestrian_radius);
    context_at(*d.recording, s[k].t, d.trajectory.agent_id, options, neighbors, robot);
    const ForceJacobian f = model_force(subject, neighbors, robot ? &*robot : nullptr, params, mode);
    const double dt = s[k + 1].t - s[k].t;
    velocity = velocity + f.force * dt;
    position = position + velocity * dt;
    out.push_back(position);
  }
  return out;
}

double evaluate_ade(std::span<const DatasetTrajectory> trajectories, const SrfmParams& params, FitMode mode,
                    const DatasetOptions& options) {
  if (trajectories.empty()) throw Error("no trajectories to evaluate");
  double sum = 0.0;
  for (const DatasetTrajectory& d : trajectories) {
    const std::vector<Vec2> predicted = rollout(d, params, mode, options);
    double err = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) err += distance(predicted[i], d.trajectory.samples[i + 1].position);
    sum += err / static_cast<double>(predicted.size());
  }
  return sum / static_cast<double>(trajectories.size());
}

std::vector<DatasetTrajectory> synthesize(const SynthConfig& config, const SrfmParams& params, std::uint64_t seed,
                                          const DatasetOptions& options) {
  if (config.recordings < 1 || config.pedestrians < 1 || config.steps < 3 || !(config.dt > 0.0)) {
    throw Error("invalid synthesis configuration");
  }
  validate(params);
  constexpr int kMaxAttempts = 200;
  std::vector<std::pair<std::string, std::vector<RawAgent>>> recordings;
  std::map<std::string, Trajectory> robots;
  const int n = config.pedestrians;

  for (int rec = 0; rec < config.recordings; ++rec) {
    const std::string rec_id = "synth-" + std::to_string(seed) + "-" + std::to_string(rec);
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxAttempts) throw Error("could not synthesize an interacting recording");
      RngStream rng = RngStream(seed, static_cast<std::uint64_t>(rec)).substream(static_cast<std::uint64_t>(attempt));

      std::vector<Vec2> pos(n);
      std::vector<Vec2> vel(n);
      std::vector<Vec2> goal(n);
      std::vector<double> speed(n);
      for (int i = 0; i < n; ++i) {
        for (int tries = 0;; ++tries) {
          const double a = rng.uniform(0.0, 2.0 * kPi);
          pos[i] = Vec2{std::cos(a), std::sin(a)} * config.start_radius +
                   Vec2{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
          bool clear = true;
          for (int j = 0; j < i; ++j) clear = clear && distance(pos[i], pos[j]) >= 1.2;
          if (clear || tries > 1000) break;
        }
        const Vec2 through = unit_and_norm(-pos[i]).unit;
        const Vec2 lateral{-through.y, through.x};
        goal[i] = -pos[i] * 6.0 + lateral * rng.uniform(-2.0, 2.0);
        speed[i] = rng.uniform(0.8, 1.4);
        vel[i] = rotate(unit_and_norm(goal[i] - pos[i]).unit, rng.uniform(-0.5, 0.5)) * rng.uniform(0.4, 1.4);
      }
      Vec2 robot_start{1000.0, 1000.0};
      Vec2 robot_velocity{};
      if (config.with_robot) {
        const double b = rng.uniform(0.0, 2.0 * kPi);
        const Vec2 dir{std::cos(b), std::sin(b)};
        robot_start = dir * -2.5 + Vec2{-dir.y, dir.x} * rng.uniform(-1.0, 1.0);
        robot_velocity = dir * config.robot_speed;
      }

      Trajectory robot;
      robot.agent_id = kDatasetRobotId;
      std::vector<Trajectory> tracks(n);
      for (int i = 0; i < n; ++i) tracks[i].agent_id = i + 1;
      std::vector<AgentState> sources;
      for (int k = 0; k < config.steps; ++k) {
        const double t = k * config.dt;
        const Vec2 robot_pos = robot_start + robot_velocity * t;
        robot.samples.push_back({t, robot_pos});
        for (int i = 0; i < n; ++i) tracks[i].samples.push_back({t, pos[i]});
        if (k + 1 == config.steps) break;

        // Velocities are re-derived from positions exactly as the dataset does.
        if (k > 0) {
          for (int i = 0; i < n; ++i) {
            const auto& s = tracks[i].samples;
            vel[i] = (s[k].position - s[k - 1].position) / (s[k].t - s[k - 1].t);
          }
        }
        const double dt = (k + 1) * config.dt - t;
        const AgentState robot_state = source_state(kDatasetRobotId, AgentKind::robot, robot_pos, options.robot_radius);
        std::vector<Vec2> next(n);
        for (int i = 0; i < n; ++i) {
          sources.clear();
          for (int j = 0; j < n; ++j) {
            if (j != i) sources.push_back(source_state(j + 1, AgentKind::pedestrian, pos[j], options.pedestrian_radius));
          }
          const AgentState subject = subject_state(i + 1, pos[i], vel[i], goal[i], speed[i], options.pedestrian_radius);
          const ForceJacobian f = model_force(subject, sources, &robot_state, params, FitMode::robot_force);
          next[i] = step_position(pos[i], vel[i], f.force, dt);
        }
        pos = next;
      }

      bool ok = true;
      for (const Trajectory& tr : tracks) {
        for (const TrajectorySample& s : tr.samples) ok = ok && is_finite(s.position);
      }
      if (ok && config.with_robot && config.require_interaction) {
        for (int i = 0; i < n && ok; ++i) {
          double closest = std::numeric_limits<double>::infinity();
          for (std::size_t k = 0; k < tracks[i].samples.size(); ++k) {
            closest = std::min(closest, distance(tracks[i].samples[k].position, robot.samples[k].position));
          }
          ok = closest <= options.interaction_distance;
        }
      }
      if (!ok) continue;

      if (config.noise > 0.0) {
        RngStream noise = rng.substream(0x6e6f697365ULL);
        for (Trajectory& tr : tracks) {
          for (TrajectorySample& s : tr.samples) {
            s.position.x += config.noise * noise.normal();
            s.position.y += config.noise * noise.normal();
          }
        }
      }
      std::vector<RawAgent> agents;
      for (int i = 0; i < n; ++i) agents.push_back({tracks[i], goal[i], speed[i]});
      recordings.emplace_back(rec_id, std::move(agents));
      robots.emplace(rec_id, std::move(robot));
      break;
    }
  }
  return build_dataset(recordings, robots, options);
}

}  // namespace fitting
}  // namespace srfm
