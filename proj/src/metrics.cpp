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

#include "srfm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace srfm::metrics {

double frechet(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) throw Error("frechet: empty trajectory");
  // Two-row dynamic program over the coupling table.
  std::vector<double> prev(b.size());
  std::vector<double> cur(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d = distance(a[i], b[j]);
      double reach;
      if (i == 0 && j == 0) {
        reach = d;
      } else if (i == 0) {
        reach = cur[j - 1];
      } else if (j == 0) {
        reach = prev[0];
      } else {
        reach = std::min({prev[j], prev[j - 1], cur[j - 1]});
      }
      cur[j] = std::max(reach, d);
    }
    std::swap(prev, cur);
  }
  return prev.back();
}

std::vector<Vec2> positions(const Trajectory& trajectory) {
  std::vector<Vec2> out;
  out.reserve(trajectory.samples.size());
  for (const TrajectorySample& s : trajectory.samples) out.push_back(s.position);
  return out;
}

double frechet(const Trajectory& a, const Trajectory& b) { return frechet(positions(a), positions(b)); }

double ade(std::span<const Vec2> predicted, std::span<const Vec2> actual) {
  if (predicted.size() != actual.size()) throw Error("ade: length mismatch");
  if (predicted.empty()) throw Error("ade: empty trajectory");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) sum += distance(predicted[i], actual[i]);
  return sum / static_cast<double>(predicted.size());
}

double ade(const Trajectory& predicted, const Trajectory& actual) {
  return ade(positions(predicted), positions(actual));
}

Trajectory truncate_at_goal(const Trajectory& trajectory) {
  Trajectory out = trajectory;
  if (trajectory.goal_reached_at) {
    const double t_end = *trajectory.goal_reached_at;
    auto it = std::find_if(out.samples.begin(), out.samples.end(),
                           [&](const TrajectorySample& s) { return s.t > t_end; });
    out.samples.erase(it, out.samples.end());
  }
  return out;
}

double path_length(const Trajectory& trajectory) {
  double length = 0.0;
  for (std::size_t i = 1; i < trajectory.samples.size(); ++i) {
    length += distance(trajectory.samples[i - 1].position, trajectory.samples[i].position);
  }
  return length;
}

double min_robot_distance(const EpisodeRecord& record) {
  double best = std::numeric_limits<double>::infinity();
  for (const Frame& f : record.frames) {
    if (!f.robot) continue;
    for (const AgentState& p : f.pedestrians) best = std::min(best, distance(p.position, f.robot->position));
  }
  return best;
}

EpisodeMetrics episode_metrics(const TwinRunResult& twin) {
  EpisodeMetrics m;
  const auto pairs = twin.pairs();
  double length_sum = 0.0;
  double time_sum = 0.0;
  for (const auto& [factual, counter] : pairs) {
    const double d = frechet(truncate_at_goal(factual), truncate_at_goal(counter));
    m.frechet_per_pedestrian.push_back(d);
    m.max_frechet = std::max(m.max_frechet, d);

    const Trajectory walked = truncate_at_goal(factual);
    length_sum += path_length(walked);
    const double start = factual.samples.empty() ? 0.0 : factual.samples.front().t;
    const double end = factual.goal_reached_at.value_or(twin.factual.end_time());
    time_sum += end - start;
  }
  if (!pairs.empty()) {
    const auto n = static_cast<double>(pairs.size());
    m.mean_frechet =
        std::accumulate(m.frechet_per_pedestrian.begin(), m.frechet_per_pedestrian.end(), 0.0) / n;
    m.mean_path_length = length_sum / n;
    m.mean_time = time_sum / n;
  }
  m.min_robot_distance = min_robot_distance(twin.factual);
  m.social_violation = std::max(0.0, twin.factual.config.social_zone_radius - m.min_robot_distance);
  m.outcome = twin.factual.outcome;
  m.robot_time = twin.factual.end_time();
  return m;
}

TTest t_test_independent(std::span<const double> a, std::span<const double> b, double alpha, bool welch) {
  if (a.size() < 2 || b.size() < 2) throw Error("t-test needs at least 2 values per sample");
  const Summary sa = summarize(a);
  const Summary sb = summarize(b);
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const double va = sa.std * sa.std;
  const double vb = sb.std * sb.std;

  TTest result;
  double se2;
  if (welch) {
    se2 = va / na + vb / nb;
    const double num = se2 * se2;
    const double den = (va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0);
    result.df = den > 0.0 ? num / den : na + nb - 2.0;
  } else {
    result.df = na + nb - 2.0;
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / result.df;
    se2 = pooled * (1.0 / na + 1.0 / nb);
  }
  if (!(se2 > 0.0)) throw Error("t-test: zero variance");
  result.t = (sa.mean - sb.mean) / std::sqrt(se2);
  const boost::math::students_t dist(result.df);
  result.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.t))));
  result.significant = result.p < alpha;
  return result;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

}  // namespace srfm::metrics
