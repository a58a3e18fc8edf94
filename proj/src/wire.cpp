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

#include "srfm/wire.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace srfm::wire {
namespace {

using nlohmann::json;

void put_double(std::string& out, double value) {
  if (!std::isfinite(value)) throw PolicyTransportError("cannot encode non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  out += buf;
}

void put_string(std::string& out, const std::string& value) { out += json(value).dump(); }

void put_u64(std::string& out, std::uint64_t value) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%" PRIu64, value);
  out += buf;
}

struct Encoder {
  std::string& out;

  void operator()(const Hello& m) const {
    out += "{\"type\":\"hello\",\"version\":" + std::to_string(m.version) +
           ",\"obs_len\":" + std::to_string(m.obs_len) + "}";
  }
  void operator()(const HelloAck& m) const {
    out += "{\"type\":\"hello_ack\",\"version\":" + std::to_string(m.version) + "}";
  }
  void operator()(const Obs& m) const {
    out += "{\"type\":\"obs\",\"episode_id\":";
    put_u64(out, m.episode_id);
    out += ",\"step\":" + std::to_string(m.step) + ",\"data\":[";
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      if (i) out += ',';
      put_double(out, m.data[i]);
    }
    out += "],\"reward_components\":{\"r_term\":";
    put_double(out, m.reward.r_term);
    out += ",\"r_dist\":";
    put_double(out, m.reward.r_dist);
    out += ",\"r_div\":";
    put_double(out, m.reward.r_div);
    out += "},\"reward\":";
    put_double(out, m.reward.r_total);
    out += m.done ? ",\"done\":true}" : ",\"done\":false}";
  }
  void operator()(const Act& m) const {
    out += "{\"type\":\"act\",\"v\":";
    put_double(out, m.v);
    out += ",\"w\":";
    put_double(out, m.w);
    out += '}';
  }
  void operator()(const Reset& m) const {
    out += "{\"type\":\"reset\",\"scenario_id\":";
    put_string(out, m.scenario_id);
    out += ",\"seed\":";
    put_u64(out, m.seed);
    out += '}';
  }
  void operator()(const ErrorMsg& m) const {
    out += "{\"type\":\"error\",\"message\":";
    put_string(out, m.message);
    out += '}';
  }
};

template <typename T>
T field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw PolicyTransportError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw PolicyTransportError(std::string("bad field '") + key + "'");
  }
}

double number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw PolicyTransportError(std::string("bad field '") + key + "'");
  return it->get<double>();
}

std::uint64_t unsigned_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number_unsigned()) {
    throw PolicyTransportError(std::string("bad field '") + key + "'");
  }
  return it->get<std::uint64_t>();
}

int int_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) throw PolicyTransportError(std::string("bad field '") + key + "'");
  return it->get<int>();
}

}  // namespace

std::string encode(const Message& message) {
  std::string out;
  std::visit(Encoder{out}, message);
  return out;
}

Message decode(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw PolicyTransportError("malformed message");
  const std::string type = field<std::string>(j, "type");
  if (type == "hello") return Hello{int_field(j, "version"), int_field(j, "obs_len")};
  if (type == "hello_ack") return HelloAck{int_field(j, "version")};
  if (type == "act") {
    Act a{number(j, "v"), number(j, "w")};
    return a;
  }
  if (type == "reset") return Reset{field<std::string>(j, "scenario_id"), unsigned_field(j, "seed")};
  if (type == "error") return ErrorMsg{field<std::string>(j, "message")};
  if (type == "obs") {
    Obs m;
    m.episode_id = unsigned_field(j, "episode_id");
    m.step = int_field(j, "step");
    const auto data = j.find("data");
    if (data == j.end() || !data->is_array()) throw PolicyTransportError("bad field 'data'");
    m.data.reserve(data->size());
    for (const json& x : *data) {
      if (!x.is_number()) throw PolicyTransportError("bad field 'data'");
      m.data.push_back(x.get<double>());
    }
    const auto rc = j.find("reward_components");
    if (rc == j.end() || !rc->is_object()) throw PolicyTransportError("bad field 'reward_components'");
    m.reward.r_term = number(*rc, "r_term");
    m.reward.r_dist = number(*rc, "r_dist");
    m.reward.r_div = number(*rc, "r_div");
    m.reward.r_total = j.contains("reward") ? number(j, "reward") : 0.0;
    m.done = field<bool>(j, "done");
    return m;
  }
  throw PolicyTransportError("unknown message type '" + type + "'");
}

std::string type_name(const Message& message) {
  static constexpr const char* kNames[] = {"hello", "hello_ack", "obs", "act", "reset", "error"};
  return kNames[message.index()];
}

}  // namespace srfm::wire
