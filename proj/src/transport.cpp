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

#include "srfm/transport.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <chrono>
#include <csignal>
#include <cstring>
#include <thread>

#include "srfm/policies.hpp"

namespace srfm::transport {
namespace {

constexpr std::size_t kMaxLine = 1 << 20;

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

void ignore_sigpipe() {
  static const bool once = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

int poll_ms(double timeout) {
  if (timeout < 0.0) return -1;
  return static_cast<int>(std::ceil(timeout * 1000.0));
}

struct HostPort {
  std::string host;
  std::string port;
};

HostPort split_host_port(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon + 1 == text.size()) {
    throw PolicyTransportError("bad endpoint '" + text + "' (expected HOST:PORT)");
  }
  std::string host = text.substr(0, colon);
  if (host.empty()) host = "127.0.0.1";
  return {host, text.substr(colon + 1)};
}

Connection connect_tcp(const std::string& address, double timeout) {
  const HostPort hp = split_host_port(address);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (const int rc = ::getaddrinfo(hp.host.c_str(), hp.port.c_str(), &hints, &found); rc != 0) {
    throw PolicyTransportError("cannot resolve '" + address + "': " + ::gai_strerror(rc));
  }
  std::string last_error = "no address";
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    // Non-blocking connect so the timeout applies.
    const int flags = ::fcntl(fd, F_GETFL);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd p{fd, POLLOUT, 0};
      rc = ::poll(&p, 1, poll_ms(timeout));
      if (rc == 1) {
        int err = 0;
        socklen_t len = sizeof err;
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        errno = err;
        rc = err == 0 ? 0 : -1;
      } else {
        errno = rc == 0 ? ETIMEDOUT : errno;
        rc = -1;
      }
    }
    if (rc == 0) {
      ::fcntl(fd, F_SETFL, flags);
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      ::freeaddrinfo(found);
      return Connection(fd, fd, true, true);
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(found);
  throw PolicyTransportError("cannot connect to '" + address + "': " + last_error);
}

Connection spawn(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw PolicyTransportError(errno_text("pipe"));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw PolicyTransportError(errno_text("pipe"));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw PolicyTransportError(errno_text("fork"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return Connection(from_child[0], to_child[1], true, false, pid);
}

}  // namespace

Connection::Connection(int read_fd, int write_fd, bool owns_fds, bool is_socket, pid_t child)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns_fds), socket_(is_socket), child_(child) {
  ignore_sigpipe();
}

Connection::Connection(Connection&& other) noexcept { *this = std::move(other); }

Connection& Connection::operator=(Connection&& other) noexcept {
  if (this != &other) {
    close();
    read_fd_ = std::exchange(other.read_fd_, -1);
    write_fd_ = std::exchange(other.write_fd_, -1);
    owns_ = other.owns_;
    socket_ = other.socket_;
    child_ = std::exchange(other.child_, -1);
    buffer_ = std::move(other.buffer_);
  }
  return *this;
}

Connection::~Connection() { close(); }

void Connection::close() {
  if (owns_) {
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  }
  read_fd_ = write_fd_ = -1;
  if (child_ > 0) {
    // Give the child a moment to exit on EOF before killing it.
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(child_, nullptr, WNOHANG) != 0) {
        child_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(child_, SIGKILL);
    ::waitpid(child_, nullptr, 0);
    child_ = -1;
  }
}

void Connection::send_line(const std::string& line) {
  if (write_fd_ < 0) throw PolicyTransportError("connection closed");
  std::string data = line;
  data += '\n';
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = socket_ ? ::send(write_fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL)
                              : ::write(write_fd_, data.data() + sent, data.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw PolicyTransportError(errno_text("disconnected"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> Connection::read_line(double timeout) {
  if (read_fd_ < 0) throw PolicyTransportError("connection closed");
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout);
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (buffer_.size() > kMaxLine) throw PolicyTransportError("message too long");
    double remaining = -1.0;
    if (timeout >= 0.0) {
      remaining = std::chrono::duration<double>(deadline - std::chrono::steady_clock::now()).count();
      if (remaining < 0.0) remaining = 0.0;
    }
    pollfd p{read_fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, poll_ms(remaining));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw PolicyTransportError(errno_text("poll"));
    }
    if (rc == 0) throw PolicyTransportError("timed out waiting for peer");
    char chunk[4096];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw PolicyTransportError(errno_text("read"));
    }
    if (n == 0) {
      if (!buffer_.empty()) throw PolicyTransportError("truncated message");
      return std::nullopt;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

wire::Message Connection::receive(double timeout) {
  auto line = read_line(timeout);
  if (!line) throw PolicyTransportError("peer disconnected");
  return wire::decode(*line);
}

Connection connect(const std::string& endpoint, double timeout) {
  if (endpoint.rfind("exec:", 0) == 0) return spawn(endpoint.substr(5));
  if (endpoint.rfind("tcp:", 0) == 0) return connect_tcp(endpoint.substr(4), timeout);
  return connect_tcp(endpoint, timeout);
}

Connection stdio_connection() { return Connection(STDIN_FILENO, STDOUT_FILENO, false, false); }

Listener::Listener(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
    throw PolicyTransportError("cannot resolve '" + host + "': " + ::gai_strerror(rc));
  }
  for (addrinfo* ai = found; ai != nullptr && fd_ < 0; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 4) == 0) {
      fd_ = fd;
    } else {
      ::close(fd);
    }
  }
  ::freeaddrinfo(found);
  if (fd_ < 0) throw PolicyTransportError("cannot listen on " + host + ":" + service);
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                     : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

Listener::~Listener() {
  if (fd_ >= 0) ::close(fd_);
}

Connection Listener::accept(double timeout) {
  pollfd p{fd_, POLLIN, 0};
  int rc;
  do {
    rc = ::poll(&p, 1, poll_ms(timeout));
  } while (rc < 0 && errno == EINTR);
  if (rc == 0) throw PolicyTransportError("timed out waiting for a client");
  if (rc < 0) throw PolicyTransportError(errno_text("poll"));
  const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) throw PolicyTransportError(errno_text("accept"));
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Connection(fd, fd, true, true);
}

ExternalPolicy::ExternalPolicy(Connection connection, std::string endpoint, double timeout)
    : connection_(std::move(connection)), endpoint_(std::move(endpoint)), timeout_(timeout) {
  connection_.send(wire::Hello{});
  const wire::Message reply = connection_.receive(timeout_);
  const auto* ack = std::get_if<wire::HelloAck>(&reply);
  if (ack == nullptr) throw PolicyTransportError("expected hello_ack, got " + wire::type_name(reply));
  if (ack->version != wire::kProtocolVersion) {
    throw HandshakeError("protocol version mismatch: local " + std::to_string(wire::kProtocolVersion) +
                         ", peer " + std::to_string(ack->version));
  }
}

void ExternalPolicy::reset(const EpisodeInfo& info) {
  episode_id_ = info.episode_id;
  connection_.send(wire::Reset{info.scenario_id, info.seed});
}

Action ExternalPolicy::act(const Observation& obs, const StepFeedback& feedback) {
  connection_.send(wire::Obs{episode_id_, feedback.step, obs.flatten(), feedback.reward, false});
  const wire::Message reply = connection_.receive(timeout_);
  const auto* act = std::get_if<wire::Act>(&reply);
  if (act == nullptr) throw PolicyTransportError("expected act, got " + wire::type_name(reply));
  return {act->v, act->w};
}

void ExternalPolicy::finish(const Observation& obs, const StepFeedback& feedback) {
  connection_.send(wire::Obs{episode_id_, feedback.step, obs.flatten(), feedback.reward, true});
}

std::unique_ptr<Policy> make_external_policy(const std::string& endpoint, double timeout) {
  return std::make_unique<ExternalPolicy>(connect(endpoint, timeout), endpoint, timeout);
}

std::uint64_t serve_policy(Connection& connection, Policy& policy, double timeout) {
  std::uint64_t actions = 0;
  std::uint64_t episode = 0;
  while (auto line = connection.read_line(timeout)) {
    const wire::Message message = wire::decode(*line);
    if (const auto* hello = std::get_if<wire::Hello>(&message)) {
      connection.send(wire::HelloAck{});
      if (hello->version != wire::kProtocolVersion) return actions;
      if (hello->obs_len != static_cast<int>(Observation::kLength)) {
        connection.send(wire::ErrorMsg{"observation length mismatch"});
        return actions;
      }
    } else if (const auto* reset = std::get_if<wire::Reset>(&message)) {
      policy.reset({reset->scenario_id, reset->seed, episode++});
    } else if (const auto* obs = std::get_if<wire::Obs>(&message)) {
      const Observation o = Observation::unflatten(obs->data);
      const StepFeedback feedback{obs->step, obs->reward, obs->done};
      if (obs->done) {
        policy.finish(o, feedback);
      } else {
        const Action a = policy.act(o, feedback);
        connection.send(wire::Act{a.v, a.w});
        ++actions;
      }
    } else {
      throw PolicyTransportError("unexpected " + wire::type_name(message) + " message");
    }
  }
  return actions;
}

ServeStats serve_environment(Connection& connection, const ServeOptions& options) {
  validate(options.config);
  connection.send(wire::Hello{});
  const wire::Message first = connection.receive(options.handshake_timeout);
  const auto* ack = std::get_if<wire::HelloAck>(&first);
  if (ack == nullptr) throw PolicyTransportError("expected hello_ack, got " + wire::type_name(first));
  if (ack->version != wire::kProtocolVersion) {
    connection.send(wire::ErrorMsg{"protocol version mismatch"});
    throw HandshakeError("protocol version mismatch: peer " + std::to_string(ack->version));
  }

  ServeStats stats;
  std::optional<sim::Episode> episode;
  std::uint64_t episode_id = 0;
  auto send_obs = [&] {
    const StepFeedback& fb = episode->last_feedback();
    connection.send(wire::Obs{episode_id, episode->step_index(), episode->observation().flatten(), fb.reward,
                              episode->done()});
  };
  while (auto line = connection.read_line(options.idle_timeout)) {
    wire::Message message;
    try {
      message = wire::decode(*line);
    } catch (const PolicyTransportError& e) {
      connection.send(wire::ErrorMsg{e.what()});
      continue;
    }
    if (const auto* reset = std::get_if<wire::Reset>(&message)) {
      try {
        const Scenario scenario = scenarios::make(parse_scenario_id(reset->scenario_id), reset->seed,
                                                  options.pedestrians, options.config.scenario_constants);
        episode.emplace(scenario, options.config, RngStream(reset->seed, 0));
      } catch (const Error& e) {
        episode.reset();
        connection.send(wire::ErrorMsg{e.what()});
        continue;
      }
      episode_id = stats.episodes++;
      send_obs();
    } else if (const auto* act = std::get_if<wire::Act>(&message)) {
      if (!episode || episode->done()) {
        connection.send(wire::ErrorMsg{"no live episode; send reset"});
        continue;
      }
      episode->step(Action(act->v, act->w));
      ++stats.steps;
      send_obs();
    } else {
      connection.send(wire::ErrorMsg{"unexpected " + wire::type_name(message) + " message"});
    }
  }
  return stats;
}

}  // namespace srfm::transport
