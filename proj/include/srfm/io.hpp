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

#pragma once

#include <string>

#include "json.hpp"
#include "srfm/bench.hpp"
#include "srfm/counterfactual.hpp"
#include "srfm/fitting.hpp"
#include "srfm/metrics.hpp"
#include "srfm/policies.hpp"
#include "srfm/sim.hpp"

/// File formats. Every reader rejects unknown keys; see FORMATS.md.
namespace srfm::io {

using Json = nlohmann::json;

/// Everything a config file can set.
struct AppConfig {
  SimConfig sim;
  PolicyConfigs policies;
  bench::CampaignConfig bench;

  friend bool operator==(const AppConfig&, const AppConfig&) = default;
};

Json to_json(const AppConfig& config);
/// Missing keys keep their defaults; unknown keys throw srfm::Error.
AppConfig app_config_from_json(const Json& j);
/// Applies `j` on top of `base`.
void merge_config(AppConfig& base, const Json& j);
AppConfig load_config(const std::string& path);

Json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const Json& j);

Json to_json(const SrfmParams& params);
SrfmParams params_from_json(const Json& j);
/// Accepts a bare parameter object or a fit result file with a "params" key.
SrfmParams load_params(const std::string& path);
Json to_json(const fitting::FitResult& result, const std::string& stage);

Json to_json(const Scenario& scenario);
Scenario scenario_from_json(const Json& j);
void save_scenario(const Scenario& scenario, const std::string& path);
Scenario load_scenario(const std::string& path);

/// JSON lines: header, one line per frame, action and event, then a footer.
std::string episode_to_jsonl(const EpisodeRecord& record);
EpisodeRecord episode_from_jsonl(const std::string& text);
void save_episode(const EpisodeRecord& record, const std::string& path);
EpisodeRecord load_episode(const std::string& path);

Json to_json(const metrics::EpisodeMetrics& m);

/// factual.jsonl, counterfactual.jsonl and twin.json (pairing manifest with
/// metrics) inside `directory`.
void save_twin(const TwinRunResult& twin, const std::string& directory);
TwinRunResult load_twin(const std::string& directory);

/// Top-down plot of every trajectory in the record.
std::string episode_svg(const EpisodeRecord& record);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
Json read_json(const std::string& path);

}  // namespace srfm::io
