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

#include "srfm/counterfactual.hpp"

#include "srfm/policies.hpp"

namespace srfm {

std::string to_string(TwinMode mode) { return mode == TwinMode::replay ? "replay" : "remove"; }

TwinMode parse_twin_mode(std::string_view name) {
  if (name == "replay") return TwinMode::replay;
  if (name == "remove") return TwinMode::remove;
  throw Error("unknown counterfactual mode '" + std::string(name) + "'");
}

std::vector<std::pair<Trajectory, Trajectory>> TwinRunResult::pairs() const {
  if (factual.pedestrian_count() != counterfactual.pedestrian_count()) {
    throw Error("twin records have different pedestrian counts");
  }
  std::vector<std::pair<Trajectory, Trajectory>> out;
  for (std::size_t i = 0; i < factual.pedestrian_count(); ++i) {
    out.emplace_back(factual.pedestrian_trajectory(i), counterfactual.pedestrian_trajectory(i));
    if (out.back().first.agent_id != out.back().second.agent_id) throw Error("twin pairing mismatch");
  }
  return out;
}

namespace counterfactual {

TwinRunResult run_twin(const Scenario& scenario, Policy& policy, const SimConfig& config, const RngStream& rng,
                       TwinMode mode) {
  if (scenario.reassign_goals && config.reassign_goals) {
    throw Error("twin runs need fixed goals; scenario '" + to_string(scenario.id) + "' reassigns them");
  }
  SimConfig factual_config = config;
  factual_config.robot_force_enabled = true;
  TwinRunResult result;
  result.mode = mode;
  result.factual = sim::run_episode(scenario, policy, factual_config, rng);

  SimConfig counter_config = config;
  counter_config.robot_force_enabled = false;
  EpisodeOptions options;
  options.robot_present = mode == TwinMode::replay;
  options.fixed_steps = static_cast<int>(result.factual.steps());
  policies::ReplayPolicy replay(result.factual.actions);
  result.counterfactual = sim::run_episode(scenario, replay, counter_config, rng, options);
  return result;
}

}  // namespace counterfactual
}  // namespace srfm
