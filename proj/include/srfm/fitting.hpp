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

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "srfm/forces.hpp"

namespace srfm {

/// Which force sees the robot during prediction.
enum class FitMode {
  pedestrian_only,      ///< robot ignored
  robot_as_pedestrian,  ///< robot repels with the pedestrian parameters
  robot_force,          ///< robot repels with its own parameters
};

std::string to_string(FitMode mode);
FitMode parse_fit_mode(std::string_view name);

enum class TrajectoryClass { interaction, non_interaction, discarded };

std::string to_string(TrajectoryClass c);

/// Every agent of one recording, indexed by time for neighbor lookup.
class Recording {
 public:
  Recording(std::string id, std::vector<Trajectory> pedestrians, std::optional<Trajectory> robot);

  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] const std::vector<Trajectory>& pedestrians() const { return pedestrians_; }
  [[nodiscard]] const std::optional<Trajectory>& robot() const { return robot_; }

  /// Pedestrian positions recorded at time t (exact grid match).
  [[nodiscard]] std::span<const std::pair<int, Vec2>> pedestrians_at(double t) const;
  [[nodiscard]] std::optional<Vec2> robot_at(double t) const;

  static std::int64_t time_key(double t);

 private:
  std::string id_;
  std::vector<Trajectory> pedestrians_;
  std::optional<Trajectory> robot_;
  std::map<std::int64_t, std::vector<std::pair<int, Vec2>>> by_time_;
  std::map<std::int64_t, Vec2> robot_by_time_;
};

struct DatasetTrajectory {
  std::shared_ptr<const Recording> recording;
  Trajectory trajectory;
  std::vector<Vec2> velocities;  ///< backward differences (forward at index 0)
  Vec2 goal;
  double desired_speed = 0.0;
  TrajectoryClass cls = TrajectoryClass::non_interaction;
  double min_robot_distance = 0.0;  ///< +inf without a robot track
};

struct DatasetOptions {
  double interaction_distance = 3.0;
  double min_duration = 2.0;
  double pedestrian_radius = 0.3;
  double robot_radius = 0.3;
  bool classify = true;  ///< requires a robot track in every recording
};

/// Per-recording agent rows before classification. `goals` and
/// `desired_speeds` override the estimates (final position, mean speed).
struct RawAgent {
  Trajectory trajectory;
  std::optional<Vec2> goal;
  std::optional<double> desired_speed;
};

std::vector<DatasetTrajectory> build_dataset(
    const std::vector<std::pair<std::string, std::vector<RawAgent>>>& recordings,
    const std::map<std::string, Trajectory>& robots, const DatasetOptions& options = {});

/// Reads the trajectory file (JSON lines, or CSV when `format` is "csv" or the
/// path ends in .csv). Throws srfm::Error on schema violations.
std::vector<DatasetTrajectory> ingest(const std::string& path, const std::string& format = "",
                                      const DatasetOptions& options = {});

/// Writes JSON lines including the goal and desired-speed extension columns.
void write_dataset(const std::string& path, std::span<const DatasetTrajectory> trajectories);

std::vector<DatasetTrajectory> select(std::span<const DatasetTrajectory> all, TrajectoryClass cls);

namespace fitting {

inline constexpr int kParamCount = 6;
using ParamVector = Eigen::Matrix<double, kParamCount, 1>;

/// Order of the fitted parameters.
inline constexpr std::array<const char*, kParamCount> kParamNames = {"A_p", "B_p", "lambda", "tau", "A_r", "B_r"};

int param_index(std::string_view name);
ParamVector to_vector(const SrfmParams& params);
SrfmParams from_vector(const ParamVector& v, SrfmParams base = {});

struct ParamBounds {
  ParamVector lower = (ParamVector() << 0.0, 0.05, 0.0, 0.05, 0.0, 0.05).finished();
  ParamVector upper = (ParamVector() << 50.0, 5.0, 1.0, 5.0, 50.0, 5.0).finished();
};

/// One-step prediction input: the observed state at t and the position
/// observed at t + dt.
struct PredictionSample {
  AgentState subject;
  std::vector<AgentState> neighbors;
  std::optional<AgentState> robot;
  double dt = 0.0;
  Vec2 observed_next;
};

std::vector<PredictionSample> prediction_samples(std::span<const DatasetTrajectory> trajectories,
                                                 const DatasetOptions& options = {});

/// Total force under `mode` and its derivative with respect to each entry of
/// ParamVector (no speed cap, no obstacles).
struct ForceJacobian {
  Vec2 force;
  std::array<Vec2, kParamCount> d{};
};

ForceJacobian model_force(const AgentState& subject, std::span<const AgentState> neighbors,
                          const AgentState* robot, const SrfmParams& params, FitMode mode);

/// p + (v + F dt) dt.
Vec2 predict(const PredictionSample& sample, const SrfmParams& params, FitMode mode);

/// Two entries (x, y) per sample: predicted minus observed next position.
Eigen::VectorXd residuals(const SrfmParams& params, std::span<const PredictionSample> samples, FitMode mode);
Eigen::VectorXd residuals(const SrfmParams& params, std::span<const DatasetTrajectory> trajectories,
                          FitMode mode);

/// Analytic d(residuals)/d(ParamVector), rows matching residuals().
Eigen::MatrixXd jacobian(const SrfmParams& params, std::span<const PredictionSample> samples, FitMode mode);

enum class FitStage { pedestrian, robot };

FitStage parse_fit_stage(std::string_view name);

struct FitOptions {
  ParamBounds bounds;
  std::vector<std::string> frozen;  ///< parameter names held at their initial value
  int max_iterations = 500;
  double step_tolerance = 1e-8;
  double relative_decrease_tolerance = 1e-10;
};

struct FitResult {
  SrfmParams params;
  double residual = 0.0;          ///< sum of squared errors (m^2)
  double initial_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::array<double, kParamCount> half_width{};  ///< 95% confidence, zero when not fitted
  std::vector<std::string> fitted;
};

/// Pedestrian stage fits A_p, B_p, lambda, tau without the robot; robot stage
/// fits A_r, B_r with the robot force. Callers pass the trajectories of the
/// matching class. Throws srfm::Error when `trajectories` is empty.
FitResult fit(std::span<const DatasetTrajectory> trajectories, FitStage stage, const SrfmParams& init,
              const FitOptions& options = {});

struct TwoStageResult {
  FitResult pedestrian;
  FitResult robot;
};

/// Pedestrian stage on non-interaction trajectories, then the robot stage on
/// interaction trajectories starting from the pedestrian-stage parameters.
TwoStageResult fit_two_stage(std::span<const DatasetTrajectory> dataset, const SrfmParams& init,
                             const FitOptions& options = {});

/// Rollout from the second sample with others replayed from the data.
std::vector<Vec2> rollout(const DatasetTrajectory& trajectory, const SrfmParams& params, FitMode mode,
                          const DatasetOptions& options = {});

/// Mean over trajectories of the rollout ADE.
double evaluate_ade(std::span<const DatasetTrajectory> trajectories, const SrfmParams& params, FitMode mode,
                    const DatasetOptions& options = {});

struct SynthConfig {
  int recordings = 20;
  int pedestrians = 6;       ///< per recording
  int steps = 80;
  double dt = 0.1;
  bool with_robot = true;    ///< false parks the robot far outside every range
  /// Resample a recording until every pedestrian passes within the
  /// interaction distance of the robot.
  bool require_interaction = true;
  double noise = 0.0;        ///< position noise standard deviation (m)
  double start_radius = 5.0;
  double robot_speed = 0.6;
};

/// Pedestrians simulated with the one-step predictor under FitMode::robot_force.
std::vector<DatasetTrajectory> synthesize(const SynthConfig& config, const SrfmParams& params, std::uint64_t seed,
                                          const DatasetOptions& options = {});

}  // namespace fitting
}  // namespace srfm
