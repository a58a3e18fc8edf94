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
#include <string_view>
#include <utility>
#include <vector>

#include "srfm/sim.hpp"

namespace srfm {

/// How the robot appears in the counterfactual run.
enum class TwinMode {
  replay,  ///< robot follows the factual action log, force disabled
  remove,  ///< robot absent from the scene
};

std::string to_string(TwinMode mode);
TwinMode parse_twin_mode(std::string_view name);

struct TwinRunResult {
  EpisodeRecord factual;
  EpisodeRecord counterfactual;
  TwinMode mode = TwinMode::replay;

  /// Per-pedestrian (factual, counterfactual) trajectories, paired by agent id.
  [[nodiscard]] std::vector<std::pair<Trajectory, Trajectory>> pairs() const;

  friend bool operator==(const TwinRunResult&, const TwinRunResult&) = default;
};

namespace counterfactual {

/// Factual episode with the robot force on, then the same scene with the
/// robot force off for exactly as many steps. Throws srfm::Error when the
/// scenario reassigns goals.
TwinRunResult run_twin(const Scenario& scenario, Policy& policy, const SimConfig& config, const RngStream& rng,
                       TwinMode mode = TwinMode::replay);

}  // namespace counterfactual
}  // namespace srfm
