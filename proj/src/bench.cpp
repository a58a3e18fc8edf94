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

#include "srfm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace srfm::bench {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits = 3) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void validate(const CampaignConfig& c) {
  if (c.scenarios.empty()) throw Error("campaign needs at least one scenario");
  if (c.policies.empty()) throw Error("campaign needs at least one policy");
  if (c.runs < 1) throw Error("campaign needs at least one run");
  if (c.workers < 0) throw Error("workers must be >= 0");
  if (c.pedestrians < 1) throw Error("pedestrians must be >= 1");
  if (!(c.abort_fraction >= 0.0 && c.abort_fraction <= 1.0)) throw Error("abort_fraction must lie in [0, 1]");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  for (ScenarioId id : c.scenarios) {
    if (id == ScenarioId::random) throw Error("the random scenario reassigns goals and cannot be benchmarked");
  }
}

double metric_value(const metrics::EpisodeMetrics& m, int index) {
  switch (index) {
    case 0: return m.mean_frechet;
    case 1: return m.min_robot_distance;
    case 2: return m.mean_path_length;
    case 3: return m.mean_time;
  }
  throw Error("bad metric index");
}

const CellSummary& CampaignReport::cell(ScenarioId scenario, const std::string& policy) const {
  for (const CellSummary& c : cells) {
    if (c.scenario == scenario && c.policy == policy) return c;
  }
  throw Error("no cell for " + to_string(scenario) + "/" + policy);
}

CampaignReport run_campaign(const CampaignConfig& config, const SimConfig& sim, const PolicyConfigs& policies,
                            const Progress& progress) {
  validate(config);
  validate(sim);
  CampaignReport report;
  report.config = config;
  for (ScenarioId s : config.scenarios) {
    for (const std::string& p : config.policies) {
      for (int k = 0; k < config.runs; ++k) {
        RunResult r;
        r.scenario = s;
        r.policy = p;
        r.run = k;
        r.seed = config.base_seed + static_cast<std::uint64_t>(k);
        report.runs.push_back(std::move(r));
      }
    }
  }

  const std::size_t total = report.runs.size();
  const auto max_failures = static_cast<std::size_t>(std::floor(config.abort_fraction * static_cast<double>(total)));
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<std::size_t> failures{0};
  std::atomic<bool> abort{false};
  std::mutex progress_mutex;

  auto work = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      RunResult& r = report.runs[i];
      try {
        const Scenario scenario = scenarios::make(r.scenario, r.seed, config.pedestrians, sim.scenario_constants);
        auto policy = policies::make_policy(r.policy, sim.policy_context(), policies);
        const TwinRunResult twin =
            counterfactual::run_twin(scenario, *policy, sim, RngStream(r.seed, 0), config.counterfactual);
        r.metrics = metrics::episode_metrics(twin);
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
        if (failures.fetch_add(1) + 1 > max_failures) abort.store(true);
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, total);
      }
    }
  };

  int workers = config.workers > 0 ? config.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(total));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  if (abort.load()) {
    report.aborted = true;
    report.abort_reason = std::to_string(failures.load()) + " failed runs exceed " +
                          std::to_string(max_failures) + " allowed";
  }
  summarize(report);
  return report;
}

void summarize(CampaignReport& report) {
  report.cells.clear();
  report.tests.clear();
  const CampaignConfig& config = report.config;
  auto values = [&](ScenarioId s, const std::string& p, auto&& get) {
    std::vector<double> out;
    for (const RunResult& r : report.runs) {
      if (r.ok && r.scenario == s && r.policy == p) out.push_back(get(r.metrics));
    }
    return out;
  };

  for (ScenarioId s : config.scenarios) {
    for (const std::string& p : config.policies) {
      CellSummary c;
      c.scenario = s;
      c.policy = p;
      for (const RunResult& r : report.runs) {
        if (r.scenario != s || r.policy != p) continue;
        if (!r.ok) {
          if (!r.error.empty()) ++c.failed;
          continue;
        }
        ++c.completed;
        switch (r.metrics.outcome) {
          case Outcome::success: ++c.success; break;
          case Outcome::collision: ++c.collision; break;
          case Outcome::timeout: ++c.timeout; break;
        }
      }
      for (int m = 0; m < kMetricCount; ++m) {
        c.metric[m] = metrics::summarize(values(s, p, [m](const metrics::EpisodeMetrics& e) { return metric_value(e, m); }));
      }
      c.social_violation = metrics::summarize(values(s, p, [](const auto& e) { return e.social_violation; }));
      c.max_frechet = metrics::summarize(values(s, p, [](const auto& e) { return e.max_frechet; }));
      report.cells.push_back(std::move(c));
    }

    const bool has_reference =
        std::find(config.policies.begin(), config.policies.end(), config.reference_policy) != config.policies.end();
    if (!has_reference) continue;
    for (const std::string& p : config.policies) {
      if (p == config.reference_policy) continue;
      for (int m = 0; m < kMetricCount; ++m) {
        Significance sig;
        sig.scenario = s;
        sig.policy = p;
        sig.metric = m;
        auto get = [m](const metrics::EpisodeMetrics& e) { return metric_value(e, m); };
        const auto a = values(s, p, get);
        const auto b = values(s, config.reference_policy, get);
        try {
          sig.test = metrics::t_test_independent(a, b, config.alpha, config.welch);
          sig.valid = true;
        } catch (const Error& e) {
          sig.note = e.what();
        }
        report.tests.push_back(std::move(sig));
      }
    }
  }
}

namespace {

const Significance* find_test(const CampaignReport& report, ScenarioId s, const std::string& p, int m) {
  for (const Significance& t : report.tests) {
    if (t.scenario == s && t.policy == p && t.metric == m) return &t;
  }
  return nullptr;
}

}  // namespace

std::string runs_csv(const CampaignReport& report) {
  std::string out =
      "scenario,policy,run,seed,status,outcome,frechet,max_frechet,min_robot_distance,social_violation,"
      "path_length,time,robot_time\n";
  for (const RunResult& r : report.runs) {
    out += to_string(r.scenario) + ',' + csv_field(r.policy) + ',' + std::to_string(r.run) + ',' +
           std::to_string(r.seed) + ',';
    if (!r.ok) {
      out += r.error.empty() ? "skipped" : "failed";
      out += ",,,,,,,,\n";
      continue;
    }
    const metrics::EpisodeMetrics& m = r.metrics;
    out += "ok," + to_string(m.outcome) + ',' + num(m.mean_frechet) + ',' + num(m.max_frechet) + ',' +
           num(m.min_robot_distance) + ',' + num(m.social_violation) + ',' + num(m.mean_path_length) + ',' +
           num(m.mean_time) + ',' + num(m.robot_time) + '\n';
  }
  return out;
}

std::string summary_csv(const CampaignReport& report) {
  std::string out = "scenario,policy,completed,failed,success,collision,timeout";
  for (const char* name : kMetricNames) {
    out += std::string(",") + name + "_mean," + name + "_std," + name + "_p," + name + "_significant";
  }
  out += '\n';
  for (const CellSummary& c : report.cells) {
    out += to_string(c.scenario) + ',' + csv_field(c.policy) + ',' + std::to_string(c.completed) + ',' +
           std::to_string(c.failed) + ',' + std::to_string(c.success) + ',' + std::to_string(c.collision) + ',' +
           std::to_string(c.timeout);
    for (int m = 0; m < kMetricCount; ++m) {
      out += ',' + num(c.metric[m].mean) + ',' + num(c.metric[m].std) + ',';
      const Significance* t = find_test(report, c.scenario, c.policy, m);
      if (t != nullptr && t->valid) {
        out += num(t->test.p) + ',' + (t->test.significant ? "1" : "0");
      } else {
        out += ',';
      }
    }
    out += '\n';
  }
  return out;
}

std::string summary_json(const CampaignReport& report) {
  using nlohmann::json;
  const CampaignConfig& c = report.config;
  json j;
  j["format"] = "srfm-campaign";
  j["version"] = 1;
  json cfg;
  for (ScenarioId s : c.scenarios) cfg["scenarios"].push_back(to_string(s));
  cfg["policies"] = c.policies;
  cfg["runs"] = c.runs;
  cfg["base_seed"] = c.base_seed;
  cfg["reference_policy"] = c.reference_policy;
  cfg["counterfactual"] = to_string(c.counterfactual);
  cfg["pedestrians"] = c.pedestrians;
  cfg["alpha"] = c.alpha;
  cfg["test"] = c.welch ? "welch" : "pooled";
  j["config"] = cfg;
  j["aborted"] = report.aborted;
  if (report.aborted) j["abort_reason"] = report.abort_reason;
  json cells = json::array();
  for (const CellSummary& cell : report.cells) {
    json e;
    e["scenario"] = to_string(cell.scenario);
    e["policy"] = cell.policy;
    e["completed"] = cell.completed;
    e["failed"] = cell.failed;
    e["outcomes"] = {{"success", cell.success}, {"collision", cell.collision}, {"timeout", cell.timeout}};
    for (int m = 0; m < kMetricCount; ++m) {
      json metric = {{"mean", finite_or_null(cell.metric[m].mean)}, {"std", finite_or_null(cell.metric[m].std)},
                     {"n", cell.metric[m].n}};
      if (const Significance* t = find_test(report, cell.scenario, cell.policy, m)) {
        if (t->valid) {
          metric["t_test"] = {{"against", c.reference_policy}, {"t", t->test.t}, {"df", t->test.df},
                              {"p", t->test.p}, {"significant", t->test.significant}};
        } else {
          metric["t_test"] = {{"against", c.reference_policy}, {"error", t->note}};
        }
      }
      e["metrics"][kMetricNames[m]] = metric;
    }
    e["metrics"]["social_violation"] = {{"mean", cell.social_violation.mean}, {"std", cell.social_violation.std}};
    e["metrics"]["max_frechet"] = {{"mean", cell.max_frechet.mean}, {"std", cell.max_frechet.std}};
    cells.push_back(e);
  }
  j["cells"] = cells;
  return j.dump(2) + "\n";
}

std::string text_table(const CampaignReport& report) {
  std::ostringstream out;
  const char* headers[] = {"Frechet Dist. (m)", "Min. Robot Dist. (m)", "Traj. Length (m)", "Time (s)"};
  std::size_t policy_width = 6;
  for (const std::string& p : report.config.policies) policy_width = std::max(policy_width, p.size());
  char line[512];
  std::snprintf(line, sizeof line, "%-14s %-*s", "scenario", static_cast<int>(policy_width), "policy");
  out << line;
  for (const char* h : headers) {
    std::snprintf(line, sizeof line, " | %-20s", h);
    out << line;
  }
  out << " | S/C/T\n";
  for (const CellSummary& c : report.cells) {
    std::snprintf(line, sizeof line, "%-14s %-*s", to_string(c.scenario).c_str(), static_cast<int>(policy_width),
                  c.policy.c_str());
    out << line;
    for (int m = 0; m < kMetricCount; ++m) {
      const Significance* t = find_test(report, c.scenario, c.policy, m);
      const bool star = t != nullptr && t->valid && t->test.significant;
      const std::string cell = fixed(c.metric[m].mean) + " ± " + fixed(c.metric[m].std) + (star ? " *" : "");
      std::snprintf(line, sizeof line, " | %-21s", cell.c_str());  // ± is two bytes
      out << line;
    }
    out << " | " << c.success << '/' << c.collision << '/' << c.timeout;
    if (c.failed) out << " (" << c.failed << " failed)";
    out << '\n';
  }
  out << "* p < " << report.config.alpha << " vs " << report.config.reference_policy << " ("
      << (report.config.welch ? "Welch" : "pooled") << " t-test)\n";
  if (report.aborted) out << "ABORTED: " << report.abort_reason << '\n';
  return out.str();
}

std::string summary_svg(const CampaignReport& report) {
  static const char* kColors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};
  const auto& scenarios = report.config.scenarios;
  const auto& policies = report.config.policies;
  const double panel_w = 560.0;
  const double panel_h = 300.0;
  const double margin = 50.0;
  const double width = 2 * panel_w;
  const double height = 2 * panel_h + 40.0;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  for (int m = 0; m < kMetricCount; ++m) {
    const double ox = (m % 2) * panel_w;
    const double oy = (m / 2) * panel_h;
    double top = 0.0;
    for (const CellSummary& c : report.cells) {
      if (std::isfinite(c.metric[m].mean)) top = std::max(top, c.metric[m].mean + c.metric[m].std);
    }
    if (!(top > 0.0)) top = 1.0;
    const double plot_w = panel_w - 2 * margin;
    const double plot_h = panel_h - 2 * margin;
    const double base_y = oy + margin + plot_h;
    out << "<g>\n<text x=\"" << ox + panel_w / 2 << "\" y=\"" << oy + 25 << "\" text-anchor=\"middle\" font-size=\"14\">"
        << kMetricNames[m] << "</text>\n";
    out << "<line x1=\"" << ox + margin << "\" y1=\"" << base_y << "\" x2=\"" << ox + margin + plot_w << "\" y2=\""
        << base_y << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ox + margin << "\" y1=\"" << oy + margin << "\" x2=\"" << ox + margin << "\" y2=\""
        << base_y << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ox + margin - 4 << "\" y=\"" << oy + margin + 4 << "\" text-anchor=\"end\">"
        << fixed(top, 2) << "</text>\n";
    const double group_w = plot_w / static_cast<double>(scenarios.size());
    const double bar_w = group_w * 0.8 / static_cast<double>(policies.size());
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
      const double gx = ox + margin + group_w * static_cast<double>(si) + group_w * 0.1;
      out << "<text x=\"" << gx + group_w * 0.4 << "\" y=\"" << base_y + 14 << "\" text-anchor=\"middle\">"
          << to_string(scenarios[si]) << "</text>\n";
      for (std::size_t pi = 0; pi < policies.size(); ++pi) {
        const CellSummary& c = report.cell(scenarios[si], policies[pi]);
        const double mean = std::isfinite(c.metric[m].mean) ? c.metric[m].mean : 0.0;
        const double h = plot_h * mean / top;
        const double x = gx + bar_w * static_cast<double>(pi);
        out << "<rect x=\"" << x << "\" y=\"" << base_y - h << "\" width=\"" << bar_w * 0.9 << "\" height=\"" << h
            << "\" fill=\"" << kColors[pi % 6] << "\"/>\n";
        const double err = plot_h * c.metric[m].std / top;
        out << "<line x1=\"" << x + bar_w * 0.45 << "\" y1=\"" << base_y - h - err << "\" x2=\"" << x + bar_w * 0.45
            << "\" y2=\"" << base_y - h + err << "\" stroke=\"black\"/>\n";
        const Significance* t = find_test(report, scenarios[si], policies[pi], m);
        if (t != nullptr && t->valid && t->test.significant) {
          out << "<text x=\"" << x + bar_w * 0.45 << "\" y=\"" << base_y - h - err - 3
              << "\" text-anchor=\"middle\">*</text>\n";
        }
      }
    }
    out << "</g>\n";
  }
  for (std::size_t pi = 0; pi < policies.size(); ++pi) {
    const double x = 20.0 + 160.0 * static_cast<double>(pi);
    out << "<rect x=\"" << x << "\" y=\"" << height - 25 << "\" width=\"12\" height=\"12\" fill=\""
        << kColors[pi % 6] << "\"/>\n";
    out << "<text x=\"" << x + 16 << "\" y=\"" << height - 15 << "\">" << xml_escape(policies[pi]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_report(const CampaignReport& report, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error("cannot create '" + directory + "': " + ec.message());
  auto write = [&](const char* name, const std::string& content) {
    const fs::path path = fs::path(directory) / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw Error("cannot write '" + path.string() + "'");
  };
  write("runs.csv", runs_csv(report));
  write("summary.csv", summary_csv(report));
  write("summary.json", summary_json(report));
  write("table.txt", text_table(report));
  write("summary.svg", summary_svg(report));
}

}  // namespace srfm::bench
