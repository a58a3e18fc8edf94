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

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srfm/bench.hpp"
#include "srfm/counterfactual.hpp"
#include "srfm/fitting.hpp"
#include "srfm/io.hpp"
#include "srfm/metrics.hpp"
#include "srfm/policies.hpp"
#include "srfm/transport.hpp"

namespace {

using namespace srfm;

std::vector<std::string> split(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

long long env_integer(const char* name, const std::string& text) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(std::string(name) + " must be an integer");
  return value;
}

double env_number(const char* name, const std::string& text) {
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(std::string(name) + " must be a number");
  return value;
}

/// Defaults, then the config file, then environment overrides. Flags are
/// applied by each subcommand afterwards.
io::AppConfig base_config(const std::string& config_flag) {
  io::AppConfig config;
  const std::optional<std::string> path = !config_flag.empty() ? std::optional(config_flag) : env("SRFM_CONFIG");
  if (path) config = io::load_config(*path);
  if (auto v = env("SRFM_WORKERS")) config.bench.workers = static_cast<int>(env_integer("SRFM_WORKERS", *v));
  if (auto v = env("SRFM_SEED")) config.bench.base_seed = static_cast<std::uint64_t>(env_integer("SRFM_SEED", *v));
  if (auto v = env("SRFM_RUNS")) config.bench.runs = static_cast<int>(env_integer("SRFM_RUNS", *v));
  if (auto v = env("SRFM_PEDESTRIANS")) config.bench.pedestrians = static_cast<int>(env_integer("SRFM_PEDESTRIANS", *v));
  if (auto v = env("SRFM_POLICY_TIMEOUT")) config.policies.transport_timeout = env_number("SRFM_POLICY_TIMEOUT", *v);
  if (auto v = env("SRFM_MAX_STEPS")) config.sim.max_steps = static_cast<int>(env_integer("SRFM_MAX_STEPS", *v));
  return config;
}

SrfmParams params_spec(const std::string& spec) {
  if (spec == "learned") return SrfmParams::learned();
  if (spec == "ferrer") return SrfmParams::ferrer();
  return io::load_params(spec);
}

struct SceneOptions {
  std::string scenario = "crosswalk";
  std::string scenario_file;
  std::string policy = "goal_seek";
  std::uint64_t seed = 0;
  int pedestrians = 0;
  int max_steps = 0;
  std::string params;
  bool no_robot_force = false;
};

void add_scene_options(CLI::App* cmd, SceneOptions& o) {
  cmd->add_option("--scenario", o.scenario, "Scenario name")->capture_default_str();
  cmd->add_option("--scenario-file", o.scenario_file, "Scenario JSON file (overrides --scenario)");
  cmd->add_option("--policy", o.policy, "goal_seek, stand_still, dwa, vo or external:<endpoint>")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Scenario and episode seed")->capture_default_str();
  cmd->add_option("--pedestrians", o.pedestrians, "Pedestrian count (default from config)");
  cmd->add_option("--max-steps", o.max_steps, "Step budget (default from config)");
  cmd->add_option("--params", o.params, "learned, ferrer or a params JSON file");
}

Scenario build_scene(const SceneOptions& o, io::AppConfig& config) {
  if (o.max_steps > 0) config.sim.max_steps = o.max_steps;
  if (!o.params.empty()) config.sim.params = params_spec(o.params);
  if (o.no_robot_force) config.sim.robot_force_enabled = false;
  validate(config.sim);
  if (!o.scenario_file.empty()) return io::load_scenario(o.scenario_file);
  const int n = o.pedestrians > 0 ? o.pedestrians : config.bench.pedestrians;
  return scenarios::make(parse_scenario_id(o.scenario), o.seed, n, config.sim.scenario_constants);
}

transport::Connection listen_or_stdio(const std::string& listen, bool use_stdio) {
  if (use_stdio) return transport::stdio_connection();
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw Error("--listen expects HOST:PORT");
  transport::Listener listener(listen.substr(0, colon), std::stoi(listen.substr(colon + 1)));
  std::fprintf(stderr, "listening on %s:%d\n", listen.substr(0, colon).c_str(), listener.port());
  return listener.accept(-1.0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social robot force model: simulation, counterfactual metrics, fitting and benchmarks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  std::string config_path;
  app.add_option("--config", config_path, "Config JSON (default: $SRFM_CONFIG)");

  // simulate
  SceneOptions sim_opts;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Run one episode and write its record");
  add_scene_options(simulate, sim_opts);
  simulate->add_flag("--no-robot-force", sim_opts.no_robot_force, "Disable the robot force on pedestrians");
  simulate->add_option("--out", sim_out, "Episode record (JSON lines)");

  // twin
  SceneOptions twin_opts;
  std::string twin_out;
  std::string twin_mode = "replay";
  auto* twin = app.add_subcommand("twin", "Factual and counterfactual run with metrics");
  add_scene_options(twin, twin_opts);
  twin->add_option("--counterfactual", twin_mode, "replay or remove")->capture_default_str();
  twin->add_option("--out", twin_out, "Directory for the two records and the pairing manifest");

  // fit
  std::string fit_in;
  std::string fit_format;
  std::string fit_stage = "both";
  std::string fit_init = "ferrer";
  std::string fit_freeze;
  std::string fit_out;
  auto* fit = app.add_subcommand("fit", "Estimate force parameters from trajectories");
  fit->add_option("--in", fit_in, "Trajectory file (JSON lines or CSV)")->required();
  fit->add_option("--format", fit_format, "jsonl or csv (default: by extension)");
  fit->add_option("--stage", fit_stage, "pedestrian, robot or both")->capture_default_str();
  fit->add_option("--init", fit_init, "learned, ferrer or a params JSON file")->capture_default_str();
  fit->add_option("--freeze", fit_freeze, "Comma-separated parameters to hold fixed (e.g. A_p)");
  fit->add_option("--out", fit_out, "Output params JSON");

  // ade
  std::string ade_in;
  std::string ade_format;
  std::string ade_params = "learned";
  std::string ade_mode = "all";
  std::string ade_class = "interaction";
  auto* ade = app.add_subcommand("ade", "Rollout displacement error on a trajectory file");
  ade->add_option("--in", ade_in, "Trajectory file")->required();
  ade->add_option("--format", ade_format, "jsonl or csv (default: by extension)");
  ade->add_option("--params", ade_params, "learned, ferrer or a params JSON file")->capture_default_str();
  ade->add_option("--mode", ade_mode, "pedestrian_only, robot_as_pedestrian, robot_force or all")
      ->capture_default_str();
  ade->add_option("--class", ade_class, "interaction, non_interaction or all")->capture_default_str();

  // bench
  std::string bench_scenarios;
  std::string bench_policies;
  int bench_runs = 0;
  std::uint64_t bench_seed = 0;
  int bench_workers = -1;
  std::string bench_out;
  std::string bench_reference;
  std::string bench_mode;
  bool bench_welch = false;
  bool bench_quiet = false;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark campaign over scenarios and policies");
  auto* opt_scen = bench_cmd->add_option("--scenarios", bench_scenarios, "Comma-separated scenario names");
  auto* opt_pol = bench_cmd->add_option("--policies", bench_policies, "Comma-separated policy specs");
  auto* opt_runs = bench_cmd->add_option("--runs", bench_runs, "Runs per scenario and policy");
  auto* opt_seed = bench_cmd->add_option("--seed", bench_seed, "Base seed (run k uses seed + k)");
  auto* opt_workers = bench_cmd->add_option("--workers", bench_workers, "Worker threads (0: all cores)");
  auto* opt_ref = bench_cmd->add_option("--reference", bench_reference, "Reference policy for t-tests");
  auto* opt_mode = bench_cmd->add_option("--counterfactual", bench_mode, "replay or remove");
  bench_cmd->add_flag("--welch", bench_welch, "Welch t-test instead of pooled variance");
  bench_cmd->add_flag("--quiet", bench_quiet, "No progress output");
  bench_cmd->add_option("--out", bench_out, "Report directory")->required();

  // replay
  std::string replay_in;
  std::string replay_svg;
  auto* replay = app.add_subcommand("replay", "Statistics and plot of an episode record");
  replay->add_option("--in", replay_in, "Episode record")->required();
  replay->add_option("--svg", replay_svg, "Write a trajectory plot");

  // serve
  std::string serve_listen = "127.0.0.1:5555";
  bool serve_stdio = false;
  int serve_pedestrians = 0;
  auto* serve = app.add_subcommand("serve", "Host the simulator for one learner over the wire protocol");
  serve->add_option("--listen", serve_listen, "HOST:PORT (port 0 picks one)")->capture_default_str();
  serve->add_flag("--stdio", serve_stdio, "Talk over stdin/stdout instead of TCP");
  serve->add_option("--pedestrians", serve_pedestrians, "Pedestrian count (default from config)");

  // host-policy
  std::string host_policy = "goal_seek";
  std::string host_listen = "127.0.0.1:5556";
  bool host_stdio = false;
  auto* host = app.add_subcommand("host-policy", "Answer an external-policy client with a built-in policy");
  host->add_option("--policy", host_policy, "Built-in policy")->capture_default_str();
  host->add_option("--listen", host_listen, "HOST:PORT")->capture_default_str();
  host->add_flag("--stdio", host_stdio, "Talk over stdin/stdout instead of TCP");

  // synth
  fitting::SynthConfig synth_cfg;
  std::string synth_out;
  std::string synth_params = "learned";
  std::uint64_t synth_seed = 1;
  bool synth_no_robot = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic trajectory file");
  synth->add_option("--out", synth_out, "Output trajectory file (JSON lines)")->required();
  synth->add_option("--recordings", synth_cfg.recordings, "Recordings")->capture_default_str();
  synth->add_option("--pedestrians", synth_cfg.pedestrians, "Pedestrians per recording")->capture_default_str();
  synth->add_option("--steps", synth_cfg.steps, "Samples per trajectory")->capture_default_str();
  synth->add_option("--noise", synth_cfg.noise, "Position noise std (m)")->capture_default_str();
  synth->add_option("--params", synth_params, "learned, ferrer or a params JSON file")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Seed")->capture_default_str();
  synth->add_flag("--no-robot", synth_no_robot, "Park the robot out of range");

  auto* show_config = app.add_subcommand("config", "Print the effective configuration as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    io::AppConfig config = base_config(config_path);

    if (simulate->parsed()) {
      const Scenario scenario = build_scene(sim_opts, config);
      auto policy = policies::make_policy(sim_opts.policy, config.sim.policy_context(), config.policies);
      const EpisodeRecord record = sim::run_episode(scenario, *policy, config.sim, RngStream(sim_opts.seed, 0));
      if (!sim_out.empty()) io::save_episode(record, sim_out);
      std::printf("outcome=%s steps=%zu time=%.2f min_robot_distance=%.3f\n", to_string(record.outcome).c_str(),
                  record.steps(), record.end_time(), metrics::min_robot_distance(record));
    } else if (twin->parsed()) {
      const Scenario scenario = build_scene(twin_opts, config);
      auto policy = policies::make_policy(twin_opts.policy, config.sim.policy_context(), config.policies);
      const TwinRunResult result = counterfactual::run_twin(scenario, *policy, config.sim,
                                                            RngStream(twin_opts.seed, 0), parse_twin_mode(twin_mode));
      if (!twin_out.empty()) io::save_twin(result, twin_out);
      std::cout << io::to_json(metrics::episode_metrics(result)).dump(2) << "\n";
    } else if (fit->parsed()) {
      const auto data = ingest(fit_in, fit_format);
      fitting::FitOptions options;
      options.frozen = split(fit_freeze);
      for (const std::string& name : options.frozen) fitting::param_index(name);
      const SrfmParams init = params_spec(fit_init);
      io::Json out;
      SrfmParams final_params = init;
      bool converged = true;
      if (fit_stage == "pedestrian" || fit_stage == "both") {
        const auto r = fitting::fit(select(data, TrajectoryClass::non_interaction), fitting::FitStage::pedestrian,
                                    init, options);
        out["pedestrian_stage"] = io::to_json(r, "pedestrian")["fit"];
        final_params = r.params;
        converged = converged && r.converged;
      }
      if (fit_stage == "robot" || fit_stage == "both") {
        const auto r = fitting::fit(select(data, TrajectoryClass::interaction), fitting::FitStage::robot,
                                    final_params, options);
        out["robot_stage"] = io::to_json(r, "robot")["fit"];
        final_params = r.params;
        converged = converged && r.converged;
      }
      if (!out.contains("pedestrian_stage") && !out.contains("robot_stage")) {
        throw Error("--stage must be pedestrian, robot or both");
      }
      out["params"] = io::to_json(final_params);
      out["converged"] = converged;
      if (!fit_out.empty()) io::write_file(fit_out, out.dump(2) + "\n");
      std::cout << out.dump(2) << "\n";
      if (!converged) std::fprintf(stderr, "srfm: warning: fit did not converge\n");
    } else if (ade->parsed()) {
      const auto data = ingest(ade_in, ade_format);
      std::vector<DatasetTrajectory> chosen;
      if (ade_class == "all") {
        for (const auto& d : data) {
          if (d.cls != TrajectoryClass::discarded) chosen.push_back(d);
        }
      } else if (ade_class == "interaction") {
        chosen = select(data, TrajectoryClass::interaction);
      } else if (ade_class == "non_interaction") {
        chosen = select(data, TrajectoryClass::non_interaction);
      } else {
        throw Error("--class must be interaction, non_interaction or all");
      }
      const SrfmParams params = params_spec(ade_params);
      std::vector<FitMode> modes;
      if (ade_mode == "all") {
        modes = {FitMode::pedestrian_only, FitMode::robot_as_pedestrian, FitMode::robot_force};
      } else {
        modes = {parse_fit_mode(ade_mode)};
      }
      std::printf("trajectories=%zu\n", chosen.size());
      for (FitMode m : modes) {
        std::printf("%-20s %.6f\n", to_string(m).c_str(), fitting::evaluate_ade(chosen, params, m));
      }
    } else if (bench_cmd->parsed()) {
      bench::CampaignConfig& c = config.bench;
      if (opt_scen->count()) {
        c.scenarios.clear();
        for (const std::string& s : split(bench_scenarios)) c.scenarios.push_back(parse_scenario_id(s));
      }
      if (opt_pol->count()) c.policies = split(bench_policies);
      if (opt_runs->count()) c.runs = bench_runs;
      if (opt_seed->count()) c.base_seed = bench_seed;
      if (opt_workers->count()) c.workers = bench_workers;
      if (opt_ref->count()) c.reference_policy = bench_reference;
      if (opt_mode->count()) c.counterfactual = parse_twin_mode(bench_mode);
      if (bench_welch) c.welch = true;
      const auto start = std::chrono::steady_clock::now();
      bench::Progress progress;
      if (!bench_quiet) {
        progress = [](std::size_t done, std::size_t total) {
          if (done % 25 == 0 || done == total) std::fprintf(stderr, "\r%zu/%zu runs", done, total);
          if (done == total) std::fprintf(stderr, "\n");
        };
      }
      const bench::CampaignReport report = bench::run_campaign(c, config.sim, config.policies, progress);
      bench::write_report(report, bench_out);
      std::cout << bench::text_table(report);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::fprintf(stderr, "campaign finished in %.1f s\n", seconds);
      if (report.aborted) {
        std::fprintf(stderr, "srfm: error: campaign aborted: %s\n", report.abort_reason.c_str());
        return 2;
      }
    } else if (replay->parsed()) {
      const EpisodeRecord record = io::load_episode(replay_in);
      std::printf("scenario=%s seed=%llu outcome=%s steps=%zu time=%.2f\n", to_string(record.scenario.id).c_str(),
                  static_cast<unsigned long long>(record.seed), to_string(record.outcome).c_str(), record.steps(),
                  record.end_time());
      std::printf("min_robot_distance=%.3f\n", metrics::min_robot_distance(record));
      for (const Trajectory& t : record.pedestrian_trajectories()) {
        const Trajectory walked = metrics::truncate_at_goal(t);
        std::printf("pedestrian %d length=%.3f reached=%s\n", t.agent_id, metrics::path_length(walked),
                    t.goal_reached_at ? std::to_string(*t.goal_reached_at).c_str() : "no");
      }
      if (!replay_svg.empty()) io::write_file(replay_svg, io::episode_svg(record));
    } else if (serve->parsed()) {
      transport::ServeOptions options;
      options.config = config.sim;
      options.pedestrians = serve_pedestrians > 0 ? serve_pedestrians : config.bench.pedestrians;
      options.handshake_timeout = config.policies.transport_timeout;
      transport::Connection connection = listen_or_stdio(serve_listen, serve_stdio);
      const auto stats = transport::serve_environment(connection, options);
      std::fprintf(stderr, "served %llu episodes, %llu steps\n", static_cast<unsigned long long>(stats.episodes),
                   static_cast<unsigned long long>(stats.steps));
    } else if (host->parsed()) {
      auto policy = policies::make_policy(host_policy, config.sim.policy_context(), config.policies);
      transport::Connection connection = listen_or_stdio(host_listen, host_stdio);
      transport::serve_policy(connection, *policy, -1.0);
    } else if (synth->parsed()) {
      synth_cfg.with_robot = !synth_no_robot;
      const auto data = fitting::synthesize(synth_cfg, params_spec(synth_params), synth_seed);
      write_dataset(synth_out, data);
      std::printf("wrote %zu trajectories to %s\n", data.size(), synth_out.c_str());
    } else if (show_config->parsed()) {
      std::cout << io::to_json(config).dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "srfm: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
