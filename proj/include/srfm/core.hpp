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

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace srfm {

/// Threshold below which a vector is treated as zero-length (meters or m/s).
inline constexpr double kEpsilon = 1e-9;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Counter-clockwise rotation by `angle` radians.
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

struct UnitNorm {
  Vec2 unit;
  double norm = 0.0;
};

/// Splits `v` into direction and length. Vectors shorter than kEpsilon
/// yield a zero unit vector and zero norm.
UnitNorm unit_and_norm(Vec2 v);

/// Unsigned angle in [0, pi] between two directions; 0 when either is
/// shorter than kEpsilon.
double angle_between(Vec2 a, Vec2 b);

enum class AgentKind { pedestrian, robot };

struct AgentState {
  int id = 0;
  AgentKind kind = AgentKind::pedestrian;
  Vec2 position;
  Vec2 velocity;
  Vec2 goal;
  double radius = 0.3;
  double desired_speed = 1.0;
  /// Body orientation; only meaningful for the robot (unicycle model).
  double heading = 0.0;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Throws srfm::Error if radius <= 0, desired_speed < 0, or any field is
/// not finite.
void validate(const AgentState& state);

struct TrajectorySample {
  double t = 0.0;
  Vec2 position;

  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

struct Trajectory {
  int agent_id = 0;
  std::vector<TrajectorySample> samples;
  std::optional<double> goal_reached_at;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] bool empty() const { return samples.empty(); }
  [[nodiscard]] double duration() const {
    return samples.empty() ? 0.0 : samples.back().t - samples.front().t;
  }
};

/// Throws srfm::Error unless timestamps are strictly increasing.
void validate(const Trajectory& trajectory);

/// Portable seedable generator (xoshiro256** seeded through splitmix64).
/// Sub-streams are derived from (seed, stream_id) so every agent can own an
/// independent sequence. Produces identical output on every platform.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

  /// A new stream sharing this seed but with a different stream id.
  [[nodiscard]] RngStream substream(std::uint64_t stream_id) const {
    return RngStream(seed_, stream_id);
  }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
};

/// 64-bit mixing function used for seeding and deterministic tie-breaks.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace srfm
