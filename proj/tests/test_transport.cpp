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

#include <gtest/gtest.h>

#include <functional>
#include <thread>

#include "srfm/policies.hpp"
#include "srfm/sim.hpp"
#include "srfm/transport.hpp"

namespace srfm::transport {
namespace {

// Runs `body` on the first client of a loopback listener in a background
// thread. Exceptions inside the server are recorded, not rethrown.
class LoopbackServer {
 public:
  explicit LoopbackServer(std::function<void(Connection&)> body) : listener_("127.0.0.1", 0) {
    thread_ = std::thread([this, body = std::move(body)] {
      try {
        Connection c = listener_.accept(10.0);
        body(c);
      } catch (const std::exception& e) {
        error_ = e.what();
      }
    });
  }
  ~LoopbackServer() {
    if (thread_.joinable()) thread_.join();
  }
  [[nodiscard]] std::string endpoint() const { return "127.0.0.1:" + std::to_string(listener_.port()); }
  void join() { thread_.join(); }
  [[nodiscard]] const std::string& error() const { return error_; }

 private:
  Listener listener_;
  std::thread thread_;
  std::string error_;
};

// Acks the handshake, then answers every observation with (0, 0).
void zero_server(Connection& c) {
  while (auto line = c.read_line(10.0)) {
    const wire::Message m = wire::decode(*line);
    if (std::holds_alternative<wire::Hello>(m)) c.send(wire::HelloAck{});
    if (const auto* o = std::get_if<wire::Obs>(&m); o && !o->done) c.send(wire::Act{0.0, 0.0});
  }
}

TEST(Transport, EchoServerRobotStandsStill) {
  LoopbackServer server(zero_server);
  SimConfig c;
  c.max_steps = 120;
  const Scenario s = scenarios::make_footpath(1);
  {
    auto policy = policies::make_policy("external:" + server.endpoint(), c.policy_context());
    EXPECT_EQ(policy->name(), "external:" + server.endpoint());
    const EpisodeRecord r = sim::run_episode(s, *policy, c, RngStream(1, 0));
    ASSERT_FALSE(r.actions.empty());
    for (const ActionSample& a : r.actions) {
      EXPECT_EQ(a.v, 0.0);
      EXPECT_EQ(a.w, 0.0);
    }
    for (const Frame& f : r.frames) EXPECT_EQ(f.robot->position, s.robot_start);
  }
  server.join();
  EXPECT_EQ(server.error(), "");
}

TEST(Transport, VersionMismatchFailsHandshake) {
  LoopbackServer server([](Connection& c) {
    c.receive(5.0);
    c.send(wire::HelloAck{wire::kProtocolVersion + 1});
    c.read_line(5.0);
  });
  EXPECT_THROW(make_external_policy(server.endpoint(), 2.0), HandshakeError);
}

TEST(Transport, SilentPeerTimesOut) {
  LoopbackServer server([](Connection& c) {
    c.receive(5.0);
    c.send(wire::HelloAck{});
    c.read_line(5.0);  // reset
    c.read_line(5.0);  // obs, never answered
    c.read_line(5.0);
  });
  auto policy = make_external_policy(server.endpoint(), 0.2);
  policy->reset({"footpath", 1, 0});
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(policy->act({}, {}), PolicyTransportError);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(2));
}

TEST(Transport, DisconnectAbortsEpisode) {
  LoopbackServer server([](Connection& c) {
    c.receive(5.0);
    c.send(wire::HelloAck{});
    c.close();
  });
  auto policy = make_external_policy(server.endpoint(), 2.0);
  server.join();
  const Scenario s = scenarios::make_footpath(1);
  EXPECT_THROW(sim::run_episode(s, *policy, SimConfig{}, RngStream(1, 0)), PolicyTransportError);
}

TEST(Transport, MalformedReplyAborts) {
  LoopbackServer server([](Connection& c) {
    c.receive(5.0);
    c.send(wire::HelloAck{});
    c.read_line(5.0);
    c.read_line(5.0);
    c.send_line("{\"type\":\"act\",\"v\":\"fast\"}");
    c.read_line(5.0);
  });
  auto policy = make_external_policy(server.endpoint(), 2.0);
  policy->reset({"footpath", 1, 0});
  EXPECT_THROW(policy->act({}, {}), PolicyTransportError);
}

TEST(Transport, TenThousandRoundTripsExact) {
  constexpr int kPairs = 10000;
  LoopbackServer server([](Connection& c) {
    int expected = 0;
    while (auto line = c.read_line(10.0)) {
      const auto o = std::get<wire::Obs>(wire::decode(*line));
      if (o.step != expected++) throw Error("step desync");
      c.send(wire::Act{o.data.front(), o.data.back() + o.reward.r_total});
    }
  });
  Connection client = connect(server.endpoint(), 5.0);
  RngStream rng(77, 0);
  for (int i = 0; i < kPairs; ++i) {
    wire::Obs o;
    o.step = i;
    o.data.resize(Observation::kLength);
    for (double& x : o.data) x = rng.normal() * std::ldexp(1.0, static_cast<int>(rng.below(40)) - 20);
    o.reward.r_total = rng.uniform(-1.0, 1.0);
    client.send(o);
    const auto a = std::get<wire::Act>(client.receive(5.0));
    ASSERT_EQ(a.v, o.data.front());
    ASSERT_EQ(a.w, o.data.back() + o.reward.r_total);
  }
  client.close();
  server.join();
  EXPECT_EQ(server.error(), "");
}

TEST(Transport, ExecEndpoint) {
  Connection c = connect("exec:cat", 1.0);
  c.send(wire::Act{0.5, -0.25});
  EXPECT_EQ(std::get<wire::Act>(c.receive(2.0)), (wire::Act{0.5, -0.25}));
  c.send_line("partial-free line");
  EXPECT_EQ(c.read_line(2.0), "partial-free line");
}

TEST(Transport, ConnectFailures) {
  EXPECT_THROW(connect("127.0.0.1:1", 0.5), PolicyTransportError);
  EXPECT_THROW(connect("no-port-here", 0.5), PolicyTransportError);
  Listener l("127.0.0.1", 0);
  EXPECT_GT(l.port(), 0);
  EXPECT_THROW(l.accept(0.05), PolicyTransportError);
}

TEST(Transport, HostedPolicyMatchesInProcess) {
  SimConfig c;
  const Scenario s = scenarios::make_crosswalk(4);
  for (const std::string name : {"goal_seek", "dwa", "vo"}) {
    auto local = policies::make_policy(name, c.policy_context());
    auto remote = policies::make_policy(
        std::string("external:exec:") + SRFM_CLI_PATH + " host-policy --stdio --policy " + name,
        c.policy_context());
    EXPECT_EQ(sim::run_episode(s, *local, c, RngStream(4, 0)), sim::run_episode(s, *remote, c, RngStream(4, 0)))
        << name;
  }
}

TEST(Transport, ServePolicyAnswersObservations) {
  LoopbackServer server([](Connection& c) {
    policies::GoalSeekPolicy gs;
    serve_policy(c, gs, 5.0);
  });
  auto remote = make_external_policy(server.endpoint(), 2.0);
  policies::GoalSeekPolicy local;
  Observation obs;
  obs.goal_distance = 3.0;
  obs.goal_angle = 0.4;
  remote->reset({"box", 2, 0});
  EXPECT_EQ(remote->act(obs, {}), local.act(obs, {}));
}

TEST(Serve, EnvironmentEpisodeLifecycle) {
  ServeOptions options;
  options.config.max_steps = 30;
  options.handshake_timeout = 5.0;
  options.idle_timeout = 10.0;
  ServeStats stats;
  Listener listener("127.0.0.1", 0);
  std::thread host([&] {
    Connection c = listener.accept(10.0);
    stats = serve_environment(c, options);
  });
  {
    Connection learner = connect("127.0.0.1:" + std::to_string(listener.port()), 5.0);
    const auto hello = std::get<wire::Hello>(learner.receive(5.0));
    EXPECT_EQ(hello.obs_len, static_cast<int>(Observation::kLength));
    learner.send(wire::HelloAck{});

    learner.send(wire::Act{0.0, 0.0});
    EXPECT_TRUE(std::holds_alternative<wire::ErrorMsg>(learner.receive(5.0)));
    learner.send_line("garbage");
    EXPECT_TRUE(std::holds_alternative<wire::ErrorMsg>(learner.receive(5.0)));
    learner.send(wire::Reset{"nowhere", 1});
    EXPECT_TRUE(std::holds_alternative<wire::ErrorMsg>(learner.receive(5.0)));

    for (int episode = 0; episode < 2; ++episode) {
      learner.send(wire::Reset{"footpath", 5});
      auto obs = std::get<wire::Obs>(learner.receive(5.0));
      EXPECT_EQ(obs.data.size(), Observation::kLength);
      EXPECT_EQ(obs.step, 0);
      EXPECT_EQ(obs.episode_id, static_cast<std::uint64_t>(episode));
      int steps = 0;
      while (!obs.done) {
        learner.send(wire::Act{0.0, 0.0});
        obs = std::get<wire::Obs>(learner.receive(5.0));
        EXPECT_EQ(obs.step, ++steps);
      }
      EXPECT_EQ(steps, 30);
      EXPECT_EQ(obs.reward.r_term, -options.config.reward.timeout_penalty);
    }
  }
  host.join();
  EXPECT_EQ(stats.episodes, 2u);
  EXPECT_EQ(stats.steps, 60u);
}

TEST(Serve, RejectsWrongVersionAck) {
  Listener listener("127.0.0.1", 0);
  std::string error;
  std::thread host([&] {
    Connection c = listener.accept(10.0);
    try {
      serve_environment(c, ServeOptions{});
    } catch (const HandshakeError& e) {
      error = e.what();
    }
  });
  {
    Connection learner = connect("127.0.0.1:" + std::to_string(listener.port()), 5.0);
    learner.receive(5.0);
    learner.send(wire::HelloAck{99});
    EXPECT_TRUE(std::holds_alternative<wire::ErrorMsg>(learner.receive(5.0)));
  }
  host.join();
  EXPECT_NE(error.find("version"), std::string::npos);
}

}  // namespace
}  // namespace srfm::transport
