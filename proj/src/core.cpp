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

#include "srfm/core.hpp"

#include <limits>

namespace srfm {

double wrap_angle(double angle) {
  double a = std::fmod(angle + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

UnitNorm unit_and_norm(Vec2 v) {
  const double n = norm(v);
  if (!(n >= kEpsilon)) return {{0.0, 0.0}, 0.0};
  return {{v.x / n, v.y / n}, n};
}

double angle_between(Vec2 a, Vec2 b) {
  if (norm(a) < kEpsilon || norm(b) < kEpsilon) return 0.0;
  // atan2 keeps full precision near 0 and pi, unlike acos of the dot product.
  return std::atan2(std::abs(cross(a, b)), dot(a, b));
}

void validate(const AgentState& state) {
  if (!(state.radius > 0.0)) throw Error("agent " + std::to_string(state.id) + ": radius must be > 0");
  if (!(state.desired_speed >= 0.0)) {
    throw Error("agent " + std::to_string(state.id) + ": desired_speed must be >= 0");
  }
  if (!is_finite(state.position) || !is_finite(state.velocity) || !is_finite(state.goal) ||
      !std::isfinite(state.heading) || !std::isfinite(state.desired_speed)) {
    throw Error("agent " + std::to_string(state.id) + ": non-finite state");
  }
}

void validate(const Trajectory& trajectory) {
  for (std::size_t i = 1; i < trajectory.samples.size(); ++i) {
    if (!(trajectory.samples[i].t > trajectory.samples[i - 1].t)) {
      throw Error("trajectory " + std::to_string(trajectory.agent_id) +
                  ": timestamps must be strictly increasing");
    }
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {
constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  std::uint64_t state = splitmix64(seed) ^ splitmix64(stream_id ^ 0xd1b54a32d192ed03ULL);
  for (auto& word : s_) {
    state += 0x9e3779b97f4a7c15ULL;
    word = splitmix64(state);
  }
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw Error("RngStream::below: n must be > 0");
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

double RngStream::normal() {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace srfm
