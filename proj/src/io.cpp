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

#include "srfm/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace srfm::io {
namespace {

// Field lists shared by the writer and the reader.

template <class V>
void fields(V& v, ActionBounds& b) {
  v("v_min", b.v_min);
  v("v_max", b.v_max);
  v("w_min", b.w_min);
  v("w_max", b.w_max);
}

template <class V>
void fields(V& v, SrfmParams& p) {
  v("A_p", p.A_p);
  v("B_p", p.B_p);
  v("lambda", p.lambda);
  v("tau", p.tau);
  v("A_r", p.A_r);
  v("B_r", p.B_r);
  v("A_o", p.A_o);
  v("B_o", p.B_o);
  v("anisotropic_pedestrians", p.anisotropic_pedestrians);
  v("anisotropic_robot", p.anisotropic_robot);
  v("anisotropic_obstacles", p.anisotropic_obstacles);
}

template <class V>
void fields(V& v, RewardConfig& r) {
  v("success_reward", r.success_reward);
  v("timeout_penalty", r.timeout_penalty);
  v("k1", r.k1);
  v("k2", r.k2);
  v("penalty_zone", r.penalty_zone);
}

template <class V>
void fields(V& v, ScenarioConstants& k) {
  v("pedestrian_radius", k.pedestrian_radius);
  v("robot_radius", k.robot_radius);
  v("desired_speed", k.desired_speed);
  v("social_zone", k.social_zone);
  v("max_attempts", k.max_attempts);
  v("random_size", k.random_size);
  v("random_min_robot_separation", k.random_min_robot_separation);
  v("random_min_goal_distance", k.random_min_goal_distance);
  v("random_spawn_spacing", k.random_spawn_spacing);
  v("lane_offset", k.lane_offset);
  v("lane_jitter", k.lane_jitter);
  v("lane_start", k.lane_start);
  v("lane_spacing", k.lane_spacing);
  v("footpath_robot_start", k.footpath_robot_start);
  v("footpath_robot_goal", k.footpath_robot_goal);
  v("crossfootpath_robot_start", k.crossfootpath_robot_start);
  v("crossfootpath_robot_goal", k.crossfootpath_robot_goal);
  v("crosswalk_lane_offset", k.crosswalk_lane_offset);
  v("crosswalk_jitter", k.crosswalk_jitter);
  v("crosswalk_start", k.crosswalk_start);
  v("crosswalk_spacing", k.crosswalk_spacing);
  v("crosswalk_robot_start", k.crosswalk_robot_start);
  v("crosswalk_robot_goal", k.crosswalk_robot_goal);
  v("box_radius", k.box_radius);
  v("box_robot_goal", k.box_robot_goal);
  v("concert_patch", k.concert_patch);
  v("concert_jitter", k.concert_jitter);
  v("concert_robot_start", k.concert_robot_start);
  v("concert_robot_goal", k.concert_robot_goal);
  v("bounds_margin", k.bounds_margin);
}

template <class V>
void fields(V& v, SimConfig& c) {
  v("dt", c.dt);
  v("max_steps", c.max_steps);
  v("speed_cap", c.speed_cap);
  v("goal_radius", c.goal_radius);
  v("collision_distance", c.collision_distance);
  v("social_zone_radius", c.social_zone_radius);
  v("robot_bounds", c.robot_bounds);
  v("params", c.params);
  v("robot_force_enabled", c.robot_force_enabled);
  v("reassign_goals", c.reassign_goals);
  v("reward", c.reward);
  v("scenario_constants", c.scenario_constants);
}

template <class V>
void fields(V& v, GoalSeekConfig& c) {
  v("turn_gain", c.turn_gain);
}

template <class V>
void fields(V& v, DwaConfig& c) {
  v("max_accel", c.max_accel);
  v("max_angular_accel", c.max_angular_accel);
  v("v_samples", c.v_samples);
  v("w_samples", c.w_samples);
  v("horizon", c.horizon);
  v("rollout_step", c.rollout_step);
  v("heading_weight", c.heading_weight);
  v("clearance_weight", c.clearance_weight);
  v("speed_weight", c.speed_weight);
  v("clearance_cap", c.clearance_cap);
  v("safety_margin", c.safety_margin);
  v("detection_range", c.detection_range);
}

template <class V>
void fields(V& v, VoConfig& c) {
  v("detection_range", c.detection_range);
  v("time_horizon", c.time_horizon);
  v("speed_samples", c.speed_samples);
  v("heading_samples", c.heading_samples);
  v("turn_gain", c.turn_gain);
  v("safety_margin", c.safety_margin);
}

template <class V>
void fields(V& v, PolicyConfigs& c) {
  v("goal_seek", c.goal_seek);
  v("dwa", c.dwa);
  v("vo", c.vo);
  v("transport_timeout", c.transport_timeout);
}

template <class V>
void fields(V& v, bench::CampaignConfig& c) {
  v("scenarios", c.scenarios);
  v("policies", c.policies);
  v("runs", c.runs);
  v("base_seed", c.base_seed);
  v("workers", c.workers);
  v("reference_policy", c.reference_policy);
  v("counterfactual", c.counterfactual);
  v("pedestrians", c.pedestrians);
  v("abort_fraction", c.abort_fraction);
  v("alpha", c.alpha);
  v("welch", c.welch);
}

template <class V>
void fields(V& v, AppConfig& c) {
  v("sim", c.sim);
  v("policies", c.policies);
  v("bench", c.bench);
}

template <class V>
void fields(V& v, Bounds& b) {
  v("min", b.min);
  v("max", b.max);
}

template <class V>
void fields(V& v, PedestrianSpec& p) {
  v("start", p.start);
  v("goal", p.goal);
  v("desired_speed", p.desired_speed);
}

template <class V>
void fields(V& v, Obstacle& o) {
  v("center", o.center);
  v("radius", o.radius);
}

template <class V>
void fields(V& v, Scenario& s) {
  v("id", s.id);
  v("bounds", s.bounds);
  v("pedestrians", s.pedestrians);
  v("robot_start", s.robot_start);
  v("robot_goal", s.robot_goal);
  v("robot_heading", s.robot_heading);
  v("obstacles", s.obstacles);
  v("reassign_goals", s.reassign_goals);
  v("seed", s.seed);
  v("pedestrian_radius", s.pedestrian_radius);
  v("robot_radius", s.robot_radius);
}

template <class V>
void fields(V& v, AgentState& a) {
  v("id", a.id);
  v("kind", a.kind);
  v("position", a.position);
  v("velocity", a.velocity);
  v("goal", a.goal);
  v("radius", a.radius);
  v("desired_speed", a.desired_speed);
  v("heading", a.heading);
}

Json encode(double x) { return x; }
Json encode(int x) { return x; }
Json encode(bool x) { return x; }
Json encode(std::uint64_t x) { return x; }
Json encode(const std::string& x) { return x; }
Json encode(Vec2 x) { return Json::array({x.x, x.y}); }
Json encode(ScenarioId x) { return to_string(x); }
Json encode(TwinMode x) { return to_string(x); }
Json encode(AgentKind x) { return x == AgentKind::robot ? "robot" : "pedestrian"; }
template <class T>
Json encode(const std::vector<T>& xs);
template <class T>
Json encode(const T& x);

struct Writer {
  Json& j;
  template <class T>
  void operator()(const char* key, const T& value) {
    j[key] = encode(value);
  }
};

template <class T>
Json encode(const std::vector<T>& xs) {
  Json out = Json::array();
  for (const T& x : xs) out.push_back(encode(x));
  return out;
}

template <class T>
Json encode(const T& x) {
  Json out = Json::object();
  Writer w{out};
  fields(w, const_cast<T&>(x));
  return out;
}

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error("config/file key '" + path + "': " + what);
}

void decode(const Json& j, double& x, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  x = j.get<double>();
}
void decode(const Json& j, int& x, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  x = j.get<int>();
}
void decode(const Json& j, bool& x, const std::string& path) {
  if (!j.is_boolean()) bad(path, "expected a boolean");
  x = j.get<bool>();
}
void decode(const Json& j, std::uint64_t& x, const std::string& path) {
  if (!j.is_number_unsigned()) bad(path, "expected a non-negative integer");
  x = j.get<std::uint64_t>();
}
void decode(const Json& j, std::string& x, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  x = j.get<std::string>();
}
void decode(const Json& j, Vec2& x, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) bad(path, "expected [x, y]");
  x = {j[0].get<double>(), j[1].get<double>()};
}
void decode(const Json& j, ScenarioId& x, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a scenario name");
  x = parse_scenario_id(j.get<std::string>());
}
void decode(const Json& j, TwinMode& x, const std::string& path) {
  if (!j.is_string()) bad(path, "expected replay or remove");
  x = parse_twin_mode(j.get<std::string>());
}
void decode(const Json& j, AgentKind& x, const std::string& path) {
  if (j == "robot") {
    x = AgentKind::robot;
  } else if (j == "pedestrian") {
    x = AgentKind::pedestrian;
  } else {
    bad(path, "expected robot or pedestrian");
  }
}
template <class T>
void decode(const Json& j, std::vector<T>& xs, const std::string& path);
template <class T>
void decode(const Json& j, T& x, const std::string& path);

struct Reader {
  const Json& j;
  std::string path;
  std::set<std::string> seen;

  template <class T>
  void operator()(const char* key, T& value) {
    seen.insert(key);
    const auto it = j.find(key);
    if (it != j.end()) decode(*it, value, path.empty() ? key : path + "." + key);
  }
  void finish() const {
    for (const auto& item : j.items()) {
      if (!seen.count(item.key())) bad(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
    }
  }
};

template <class T>
void decode(const Json& j, std::vector<T>& xs, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array");
  xs.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    T x{};
    decode(j[i], x, path + "[" + std::to_string(i) + "]");
    xs.push_back(std::move(x));
  }
}

template <class T>
void decode(const Json& j, T& x, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  Reader r{j, path, {}};
  fields(r, x);
  r.finish();
}

template <class T>
T decode_top(const Json& j, T value = {}) {
  decode(j, value, "");
  return value;
}

Json frame_to_json(const Frame& f) {
  Json j;
  j["type"] = "frame";
  j["step"] = f.step;
  j["t"] = f.t;
  j["robot"] = f.robot ? encode(*f.robot) : Json(nullptr);
  j["pedestrians"] = encode(f.pedestrians);
  return j;
}

}  // namespace

Json to_json(const AppConfig& config) { return encode(config); }

AppConfig app_config_from_json(const Json& j) { return decode_top<AppConfig>(j); }

void merge_config(AppConfig& base, const Json& j) { decode(j, base, ""); }

AppConfig load_config(const std::string& path) {
  AppConfig c = app_config_from_json(read_json(path));
  validate(c.sim);
  bench::validate(c.bench);
  return c;
}

Json to_json(const SimConfig& config) { return encode(config); }
SimConfig sim_config_from_json(const Json& j) { return decode_top<SimConfig>(j); }

Json to_json(const SrfmParams& params) { return encode(params); }

SrfmParams params_from_json(const Json& j) {
  const SrfmParams p = decode_top<SrfmParams>(j);
  validate(p);
  return p;
}

SrfmParams load_params(const std::string& path) {
  const Json j = read_json(path);
  if (j.is_object() && j.contains("params")) return params_from_json(j.at("params"));
  return params_from_json(j);
}

Json to_json(const fitting::FitResult& r, const std::string& stage) {
  Json j;
  j["params"] = to_json(r.params);
  Json fit;
  fit["stage"] = stage;
  fit["fitted"] = r.fitted;
  fit["residual"] = r.residual;
  fit["initial_residual"] = r.initial_residual;
  fit["iterations"] = r.iterations;
  fit["converged"] = r.converged;
  fit["stop_reason"] = r.stop_reason;
  for (int i = 0; i < fitting::kParamCount; ++i) {
    if (r.half_width[i] != 0.0) {
      fit["half_width"][fitting::kParamNames[i]] =
          std::isfinite(r.half_width[i]) ? Json(r.half_width[i]) : Json(nullptr);
    }
  }
  j["fit"] = fit;
  return j;
}

Json to_json(const Scenario& scenario) {
  Json j = encode(scenario);
  j["format"] = "srfm-scenario";
  j["version"] = 1;
  return j;
}

Scenario scenario_from_json(const Json& j) {
  Json body = j;
  if (body.is_object()) {
    if (body.contains("format") && (body["format"] != "srfm-scenario" || body.value("version", 0) != 1)) {
      throw Error("unsupported scenario file");
    }
    body.erase("format");
    body.erase("version");
  }
  Scenario s = decode_top<Scenario>(body);
  scenarios::validate(s);
  return s;
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  write_file(path, to_json(scenario).dump(2) + "\n");
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(read_json(path)); }

std::string episode_to_jsonl(const EpisodeRecord& record) {
  std::string out;
  Json header;
  header["format"] = "srfm-episode";
  header["version"] = EpisodeRecord::kFormatVersion;
  header["seed"] = record.seed;
  header["config"] = encode(record.config);
  header["scenario"] = encode(record.scenario);
  out += header.dump() + "\n";
  for (const Frame& f : record.frames) out += frame_to_json(f).dump() + "\n";
  for (const ActionSample& a : record.actions) {
    out += Json{{"type", "action"}, {"t", a.t}, {"v", a.v}, {"w", a.w}}.dump() + "\n";
  }
  for (const Event& e : record.events) {
    out += Json{{"type", "event"}, {"t", e.t}, {"kind", to_string(e.kind)}, {"agent", e.agent_id}}.dump() + "\n";
  }
  out += Json{{"type", "footer"},
              {"outcome", to_string(record.outcome)},
              {"steps", record.steps()},
              {"frames", record.frames.size()},
              {"actions", record.actions.size()},
              {"events", record.events.size()}}
             .dump() +
         "\n";
  return out;
}

EpisodeRecord episode_from_jsonl(const std::string& text) {
  EpisodeRecord r;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  bool footer = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fail = [&](const std::string& what) { throw Error("episode line " + std::to_string(line_no) + ": " + what); };
    if (footer) fail("content after footer");
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("invalid JSON");
    if (!header) {
      if (j.value("format", "") != "srfm-episode") fail("not an episode file");
      if (j.value("version", -1) != EpisodeRecord::kFormatVersion) fail("unsupported episode version");
      decode(j.at("seed"), r.seed, "seed");
      r.config = decode_top<SimConfig>(j.at("config"));
      r.scenario = decode_top<Scenario>(j.at("scenario"));
      header = true;
      continue;
    }
    const std::string type = j.value("type", "");
    if (type == "frame") {
      Frame f;
      decode(j.at("step"), f.step, "step");
      decode(j.at("t"), f.t, "t");
      if (!j.at("robot").is_null()) {
        AgentState robot;
        decode(j.at("robot"), robot, "robot");
        f.robot = robot;
      }
      decode(j.at("pedestrians"), f.pedestrians, "pedestrians");
      r.frames.push_back(std::move(f));
    } else if (type == "action") {
      ActionSample a;
      decode(j.at("t"), a.t, "t");
      decode(j.at("v"), a.v, "v");
      decode(j.at("w"), a.w, "w");
      r.actions.push_back(a);
    } else if (type == "event") {
      Event e;
      decode(j.at("t"), e.t, "t");
      e.kind = parse_event_kind(j.at("kind").get<std::string>());
      decode(j.at("agent"), e.agent_id, "agent");
      r.events.push_back(e);
    } else if (type == "footer") {
      r.outcome = parse_outcome(j.at("outcome").get<std::string>());
      if (j.at("frames").get<std::size_t>() != r.frames.size() ||
          j.at("actions").get<std::size_t>() != r.actions.size() ||
          j.at("events").get<std::size_t>() != r.events.size()) {
        fail("footer counts disagree with the body (truncated file?)");
      }
      footer = true;
    } else {
      fail("unknown line type '" + type + "'");
    }
  }
  if (!header) throw Error("empty episode file");
  if (!footer) throw Error("episode file has no footer (truncated?)");
  return r;
}

void save_episode(const EpisodeRecord& record, const std::string& path) {
  write_file(path, episode_to_jsonl(record));
}

EpisodeRecord load_episode(const std::string& path) {
  try {
    return episode_from_jsonl(read_file(path));
  } catch (const Json::exception& e) {
    throw Error("'" + path + "': " + e.what());
  }
}

Json to_json(const metrics::EpisodeMetrics& m) {
  auto finite = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  Json j;
  j["frechet_per_pedestrian"] = m.frechet_per_pedestrian;
  j["mean_frechet"] = m.mean_frechet;
  j["max_frechet"] = m.max_frechet;
  j["min_robot_distance"] = finite(m.min_robot_distance);
  j["social_violation"] = m.social_violation;
  j["mean_path_length"] = m.mean_path_length;
  j["mean_time"] = m.mean_time;
  j["outcome"] = to_string(m.outcome);
  j["robot_time"] = m.robot_time;
  return j;
}

void save_twin(const TwinRunResult& twin, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error("cannot create '" + directory + "': " + ec.message());
  save_episode(twin.factual, (fs::path(directory) / "factual.jsonl").string());
  save_episode(twin.counterfactual, (fs::path(directory) / "counterfactual.jsonl").string());
  Json manifest;
  manifest["format"] = "srfm-twin";
  manifest["version"] = 1;
  manifest["mode"] = to_string(twin.mode);
  manifest["factual"] = "factual.jsonl";
  manifest["counterfactual"] = "counterfactual.jsonl";
  Json pairs = Json::array();
  const auto trajectories = twin.pairs();
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    pairs.push_back({{"agent_id", trajectories[i].first.agent_id}, {"index", i}});
  }
  manifest["pairs"] = pairs;
  manifest["metrics"] = to_json(metrics::episode_metrics(twin));
  write_file((fs::path(directory) / "twin.json").string(), manifest.dump(2) + "\n");
}

TwinRunResult load_twin(const std::string& directory) {
  namespace fs = std::filesystem;
  const Json manifest = read_json((fs::path(directory) / "twin.json").string());
  if (manifest.value("format", "") != "srfm-twin" || manifest.value("version", 0) != 1) {
    throw Error("unsupported twin manifest");
  }
  TwinRunResult twin;
  twin.mode = parse_twin_mode(manifest.at("mode").get<std::string>());
  twin.factual = load_episode((fs::path(directory) / manifest.at("factual").get<std::string>()).string());
  twin.counterfactual =
      load_episode((fs::path(directory) / manifest.at("counterfactual").get<std::string>()).string());
  return twin;
}

std::string episode_svg(const EpisodeRecord& record) {
  Bounds b = record.scenario.bounds;
  for (const Frame& f : record.frames) {
    auto grow = [&](Vec2 p) {
      b.min = {std::min(b.min.x, p.x), std::min(b.min.y, p.y)};
      b.max = {std::max(b.max.x, p.x), std::max(b.max.y, p.y)};
    };
    if (f.robot) grow(f.robot->position);
    for (const AgentState& p : f.pedestrians) grow(p.position);
  }
  const double scale = 40.0;
  const double pad = 20.0;
  const double w = (b.max.x - b.min.x) * scale + 2 * pad;
  const double h = (b.max.y - b.min.y) * scale + 2 * pad;
  auto sx = [&](double x) { return pad + (x - b.min.x) * scale; };
  auto sy = [&](double y) { return h - pad - (y - b.min.y) * scale; };
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  for (const Obstacle& o : record.scenario.obstacles) {
    out << "<circle cx=\"" << sx(o.center.x) << "\" cy=\"" << sy(o.center.y) << "\" r=\"" << o.radius * scale
        << "\" fill=\"#999\"/>\n";
  }
  auto polyline = [&](const Trajectory& t, const char* color, double width) {
    if (t.samples.empty()) return;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\" points=\"";
    for (const TrajectorySample& s : t.samples) out << sx(s.position.x) << ',' << sy(s.position.y) << ' ';
    out << "\"/>\n";
    const Vec2 end = t.samples.back().position;
    out << "<circle cx=\"" << sx(end.x) << "\" cy=\"" << sy(end.y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  };
  for (const Trajectory& t : record.pedestrian_trajectories()) polyline(t, "#4c72b0", 1.5);
  polyline(record.robot_trajectory(), "#c44e52", 2.5);
  const Vec2 goal = record.scenario.robot_goal;
  out << "<circle cx=\"" << sx(goal.x) << "\" cy=\"" << sy(goal.y) << "\" r=\"" << record.config.goal_radius * scale
      << "\" fill=\"none\" stroke=\"#c44e52\" stroke-dasharray=\"4 3\"/>\n";
  out << "</svg>\n";
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("failed writing '" + path + "'");
}

Json read_json(const std::string& path) {
  const std::string text = read_file(path);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error("'" + path + "' is not valid JSON");
  return j;
}

}  // namespace srfm::io
