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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "srfm/counterfactual.hpp"
#include "srfm/metrics.hpp"
#include "srfm/policies.hpp"

namespace srfm::bench {

struct CampaignConfig {
  std::vector<ScenarioId> scenarios = evaluation_scenarios();
  std::vector<std::string> policies = {"goal_seek", "dwa", "vo"};
  int runs = 100;
  std::uint64_t base_seed = 7;
  int workers = 0;  ///< 0 uses the hardware concurrency
  std::string reference_policy = "goal_seek";
  TwinMode counterfactual = TwinMode::replay;
  int pedestrians = 10;
  /// Abort once more than this fraction of all runs failed.
  double abort_fraction = 0.1;
  double alpha = 0.05;
  bool welch = false;

  friend bool operator==(const CampaignConfig&, const CampaignConfig&) = default;
};

void validate(const CampaignConfig& config);

/// The four table metrics, in column order.
inline constexpr const char* kMetricNames[] = {"frechet", "min_robot_distance", "path_length", "time"};
inline constexpr int kMetricCount = 4;

double metric_value(const metrics::EpisodeMetrics& m, int index);

struct RunResult {
  ScenarioId scenario = ScenarioId::random;
  std::string policy;
  int run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  metrics::EpisodeMetrics metrics;
};

struct CellSummary {
  ScenarioId scenario = ScenarioId::random;
  std::string policy;
  int completed = 0;
  int failed = 0;
  int success = 0;
  int collision = 0;
  int timeout = 0;
  metrics::Summary metric[kMetricCount];
  metrics::Summary social_violation;
  metrics::Summary max_frechet;
};

struct Significance {
  ScenarioId scenario = ScenarioId::random;
  std::string policy;  ///< compared against the reference policy
  int metric = 0;
  bool valid = false;
  std::string note;
  metrics::TTest test;
};

struct CampaignReport {
  CampaignConfig config;
  std::vector<RunResult> runs;  ///< (scenario, policy, run) order
  std::vector<CellSummary> cells;
  std::vector<Significance> tests;
  bool aborted = false;
  std::string abort_reason;

  [[nodiscard]] const CellSummary& cell(ScenarioId scenario, const std::string& policy) const;
};

using Progress = std::function<void(std::size_t done, std::size_t total)>;

/// One twin run per (scenario, policy, k) with scenario seed base_seed + k,
/// executed on a worker pool; results are ordered deterministically.
CampaignReport run_campaign(const CampaignConfig& config, const SimConfig& sim,
                            const PolicyConfigs& policies = {}, const Progress& progress = {});

/// Aggregates and significance tests from `report.runs`.
void summarize(CampaignReport& report);

std::string runs_csv(const CampaignReport& report);
std::string summary_csv(const CampaignReport& report);
std::string summary_json(const CampaignReport& report);
std::string text_table(const CampaignReport& report);
std::string summary_svg(const CampaignReport& report);

/// Writes runs.csv, summary.csv, summary.json, table.txt and summary.svg.
void write_report(const CampaignReport& report, const std::string& directory);

}  // namespace srfm::bench
