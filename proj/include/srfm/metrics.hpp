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

#include <span>
#include <vector>

#include "srfm/counterfactual.hpp"

namespace srfm::metrics {

/// Discrete Fréchet distance over positions (timestamps ignored). Throws
/// srfm::Error on an empty input.
double frechet(std::span<const Vec2> a, std::span<const Vec2> b);
double frechet(const Trajectory& a, const Trajectory& b);

/// Mean pointwise error. Throws srfm::Error on length mismatch or empty input.
double ade(std::span<const Vec2> predicted, std::span<const Vec2> actual);
double ade(const Trajectory& predicted, const Trajectory& actual);

std::vector<Vec2> positions(const Trajectory& trajectory);

/// Samples up to and including goal_reached_at (all samples if unset).
Trajectory truncate_at_goal(const Trajectory& trajectory);

double path_length(const Trajectory& trajectory);

/// Smallest robot-pedestrian center distance over the record; +inf without a
/// robot or pedestrians.
double min_robot_distance(const EpisodeRecord& record);

struct EpisodeMetrics {
  std::vector<double> frechet_per_pedestrian;
  double mean_frechet = 0.0;
  double max_frechet = 0.0;
  double min_robot_distance = 0.0;
  /// Shortfall of min_robot_distance below the social zone radius (>= 0).
  double social_violation = 0.0;
  double mean_path_length = 0.0;
  double mean_time = 0.0;
  Outcome outcome = Outcome::timeout;
  double robot_time = 0.0;

  friend bool operator==(const EpisodeMetrics&, const EpisodeMetrics&) = default;
};

EpisodeMetrics episode_metrics(const TwinRunResult& twin);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  bool significant = false;
};

/// Two-sided independent two-sample t-test; pooled variance unless `welch`.
/// Throws srfm::Error for samples shorter than 2 or zero variance.
TTest t_test_independent(std::span<const double> a, std::span<const double> b, double alpha = 0.05,
                         bool welch = false);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation (n - 1)
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

}  // namespace srfm::metrics
