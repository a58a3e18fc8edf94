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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "srfm/policy.hpp"

/// Newline-delimited JSON messages shared by external policies and `serve`.
/// Every message is one JSON object with a "type" field; see FORMATS.md.
namespace srfm::wire {

inline constexpr int kProtocolVersion = 1;

struct Hello {
  int version = kProtocolVersion;
  int obs_len = static_cast<int>(Observation::kLength);
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct HelloAck {
  int version = kProtocolVersion;
  friend bool operator==(const HelloAck&, const HelloAck&) = default;
};

struct Obs {
  std::uint64_t episode_id = 0;
  int step = 0;
  std::vector<double> data;
  RewardComponents reward;  ///< r_total travels as "reward"
  bool done = false;
  friend bool operator==(const Obs&, const Obs&) = default;
};

struct Act {
  double v = 0.0;
  double w = 0.0;
  friend bool operator==(const Act&, const Act&) = default;
};

struct Reset {
  std::string scenario_id;
  std::uint64_t seed = 0;
  friend bool operator==(const Reset&, const Reset&) = default;
};

/// Sent by either side before closing on a protocol violation.
struct ErrorMsg {
  std::string message;
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

using Message = std::variant<Hello, HelloAck, Obs, Act, Reset, ErrorMsg>;

/// One line of JSON without the trailing newline. Floats use 17 significant
/// digits; non-finite values throw PolicyTransportError.
std::string encode(const Message& message);

/// Throws PolicyTransportError on malformed input.
Message decode(std::string_view line);

std::string type_name(const Message& message);

}  // namespace srfm::wire
