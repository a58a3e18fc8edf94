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

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <sstream>

#include "srfm/io.hpp"
#include "test_util.hpp"

namespace srfm {
namespace {

EpisodeRecord sample_episode(ScenarioId id = ScenarioId::crosswalk, const std::string& policy = "dwa") {
  SimConfig config;
  config.max_steps = 120;
  auto p = policies::make_policy(policy, config.policy_context());
  return sim::run_episode(scenarios::make(id, 4), *p, config, RngStream(4, 0));
}

TEST(EpisodeFile, RoundTripIsBitExact) {
  testing::TempDir dir;
  for (ScenarioId id : {ScenarioId::crosswalk, ScenarioId::random, ScenarioId::concert}) {
    const EpisodeRecord r = sample_episode(id);
    io::save_episode(r, dir.file("e.jsonl"));
    const EpisodeRecord back = io::load_episode(dir.file("e.jsonl"));
    EXPECT_EQ(back, r) << to_string(id);
    EXPECT_EQ(io::episode_to_jsonl(back), io::episode_to_jsonl(r));
  }
}

TEST(EpisodeFile, TruncationDetected) {
  const std::string text = io::episode_to_jsonl(sample_episode());
  const std::size_t cut = text.rfind('\n', text.size() - 2);
  EXPECT_THROW(io::episode_from_jsonl(text.substr(0, cut + 1)), Error);
  // drop one frame line but keep the footer
  const std::size_t first = text.find('\n');
  const std::size_t second = text.find('\n', first + 1);
  EXPECT_THROW(io::episode_from_jsonl(text.substr(0, first + 1) + text.substr(second + 1)), Error);
  EXPECT_THROW(io::episode_from_jsonl(""), Error);
  EXPECT_THROW(io::episode_from_jsonl("{\"format\":\"other\"}\n"), Error);
  EXPECT_THROW(io::episode_from_jsonl(text + "{\"type\":\"frame\"}\n"), Error);
  EXPECT_THROW(io::load_episode("/nonexistent/e.jsonl"), Error);
}

TEST(TwinFile, RoundTripIsBitExact) {
  testing::TempDir dir;
  SimConfig config;
  config.max_steps = 100;
  auto p = policies::make_policy("goal_seek", config.policy_context());
  const TwinRunResult twin = counterfactual::run_twin(scenarios::make_box(2), *p, config, RngStream(2, 0));
  io::save_twin(twin, dir.file("twin"));
  const TwinRunResult back = io::load_twin(dir.file("twin"));
  EXPECT_EQ(back, twin);
  EXPECT_EQ(metrics::episode_metrics(back), metrics::episode_metrics(twin));
  const io::Json manifest = io::read_json(dir.file("twin") + "/twin.json");
  EXPECT_EQ(manifest["format"], "srfm-twin");
  EXPECT_EQ(manifest["pairs"].size(), 10u);
  EXPECT_EQ(manifest["metrics"]["mean_frechet"].get<double>(), metrics::episode_metrics(twin).mean_frechet);
}

TEST(Config, ShippedDefaultMatchesBuiltIn) {
  const io::AppConfig shipped = io::load_config(std::string(SRFM_SOURCE_DIR) + "/config/default.json");
  EXPECT_EQ(shipped, io::AppConfig{});
  EXPECT_EQ(io::read_json(std::string(SRFM_SOURCE_DIR) + "/config/default.json"), io::to_json(io::AppConfig{}));
}

TEST(Config, RoundTripAndPartialMerge) {
  io::AppConfig c;
  c.sim.dt = 0.05;
  c.sim.params = SrfmParams::ferrer();
  c.bench.policies = {"vo"};
  c.bench.counterfactual = TwinMode::remove;
  c.policies.dwa.clearance_weight = 2.5;
  EXPECT_EQ(io::app_config_from_json(io::to_json(c)), c);

  io::AppConfig base;
  io::merge_config(base, io::Json::parse(R"({"sim":{"max_steps":99},"bench":{"runs":4}})"));
  EXPECT_EQ(base.sim.max_steps, 99);
  EXPECT_EQ(base.bench.runs, 4);
  EXPECT_EQ(base.sim.dt, 0.1);
}

TEST(Config, UnknownKeysAndBadTypesRejected) {
  io::AppConfig base;
  EXPECT_THROW(io::merge_config(base, io::Json::parse(R"({"sim":{"max_step":99}})")), Error);
  EXPECT_THROW(io::merge_config(base, io::Json::parse(R"({"simulation":{}})")), Error);
  EXPECT_THROW(io::merge_config(base, io::Json::parse(R"({"sim":{"dt":"fast"}})")), Error);
  try {
    io::merge_config(base, io::Json::parse(R"({"sim":{"params":{"A_q":1}}})"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("A_q"), std::string::npos);
  }
  testing::TempDir dir;
  io::write_file(dir.file("bad.json"), "{\"sim\": {\"dt\": -1}}");
  EXPECT_THROW(io::load_config(dir.file("bad.json")), Error);
  io::write_file(dir.file("broken.json"), "{");
  EXPECT_THROW(io::load_config(dir.file("broken.json")), Error);
}

TEST(Params, LoadPlainOrFitOutput) {
  testing::TempDir dir;
  const SrfmParams p = SrfmParams::ferrer();
  io::write_file(dir.file("p.json"), io::to_json(p).dump());
  EXPECT_EQ(io::load_params(dir.file("p.json")), p);
  io::Json wrapped;
  wrapped["params"] = io::to_json(p);
  wrapped["converged"] = true;
  io::write_file(dir.file("fit.json"), wrapped.dump());
  EXPECT_EQ(io::load_params(dir.file("fit.json")), p);
  io::write_file(dir.file("neg.json"), R"({"B_p": -1})");
  EXPECT_THROW(io::load_params(dir.file("neg.json")), Error);
}

TEST(ScenarioFile, RoundTrip) {
  testing::TempDir dir;
  for (ScenarioId id : {ScenarioId::random, ScenarioId::footpath, ScenarioId::concert}) {
    const Scenario s = scenarios::make(id, 12);
    io::save_scenario(s, dir.file("s.json"));
    EXPECT_EQ(io::load_scenario(dir.file("s.json")), s);
  }
  io::Json j = io::to_json(scenarios::make_box(1));
  j["format"] = "srfm-episode";
  EXPECT_THROW(io::scenario_from_json(j), Error);
}

TEST(Svg, WellFormed) {
  const std::string svg = io::episode_svg(sample_episode());
  boost::property_tree::ptree tree;
  std::istringstream in(svg);
  ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree));
  EXPECT_EQ(tree.begin()->first, "svg");
}

TEST(Files, ReadWriteErrors) {
  testing::TempDir dir;
  io::write_file(dir.file("x.txt"), "abc");
  EXPECT_EQ(io::read_file(dir.file("x.txt")), "abc");
  EXPECT_THROW(io::read_file(dir.file("none.txt")), Error);
  EXPECT_THROW(io::write_file("/nonexistent/dir/x.txt", "a"), Error);
  EXPECT_THROW(io::read_json(dir.file("x.txt")), Error);
}

}  // namespace
}  // namespace srfm
