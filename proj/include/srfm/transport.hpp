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

#include <sys/types.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "srfm/policy.hpp"
#include "srfm/sim.hpp"
#include "srfm/wire.hpp"

namespace srfm::transport {

/// The peer speaks a different protocol version.
class HandshakeError : public PolicyTransportError {
 public:
  using PolicyTransportError::PolicyTransportError;
};

/// A bidirectional line stream over file descriptors (socket, pipe pair, or
/// stdio). Timeouts are in seconds; a negative timeout waits forever.
class Connection {
 public:
  Connection(int read_fd, int write_fd, bool owns_fds, bool is_socket, pid_t child = -1);
  Connection(Connection&& other) noexcept;
  Connection& operator=(Connection&& other) noexcept;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection();

  void send_line(const std::string& line);
  /// nullopt on end of stream; throws PolicyTransportError on timeout.
  std::optional<std::string> read_line(double timeout);

  void send(const wire::Message& message) { send_line(wire::encode(message)); }
  /// Throws PolicyTransportError on timeout, disconnect or malformed input.
  wire::Message receive(double timeout);

  void close();

 private:
  int read_fd_ = -1;
  int write_fd_ = -1;
  bool owns_ = false;
  bool socket_ = false;
  pid_t child_ = -1;
  std::string buffer_;
};

/// Endpoints: "tcp:HOST:PORT", "HOST:PORT", or "exec:COMMAND" (runs COMMAND
/// through /bin/sh and talks over its stdin/stdout).
Connection connect(const std::string& endpoint, double timeout);

/// The process's own stdin/stdout.
Connection stdio_connection();

class Listener {
 public:
  /// Port 0 picks a free port.
  Listener(const std::string& host, int port);
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  [[nodiscard]] int port() const { return port_; }
  Connection accept(double timeout);

 private:
  int fd_ = -1;
  int port_ = 0;
};

/// Client side of the policy protocol. Connects and completes the handshake in
/// the constructor.
class ExternalPolicy final : public Policy {
 public:
  ExternalPolicy(Connection connection, std::string endpoint, double timeout);
  [[nodiscard]] std::string name() const override { return "external:" + endpoint_; }
  void reset(const EpisodeInfo& info) override;
  Action act(const Observation& obs, const StepFeedback& feedback) override;
  void finish(const Observation& obs, const StepFeedback& feedback) override;

 private:
  Connection connection_;
  std::string endpoint_;
  double timeout_;
  std::uint64_t episode_id_ = 0;
};

std::unique_ptr<Policy> make_external_policy(const std::string& endpoint, double timeout);

/// Answers a single client with `policy` until the stream ends. Returns the
/// number of actions sent.
std::uint64_t serve_policy(Connection& connection, Policy& policy, double timeout);

struct ServeOptions {
  SimConfig config;
  int pedestrians = 10;
  double handshake_timeout = 5.0;
  double idle_timeout = -1.0;  ///< wait between learner messages
};

struct ServeStats {
  std::uint64_t episodes = 0;
  std::uint64_t steps = 0;
};

/// Hosts the simulator for one learner: sends hello, then answers reset with
/// the initial obs and each act with the next obs until the stream ends.
ServeStats serve_environment(Connection& connection, const ServeOptions& options);

}  // namespace srfm::transport
