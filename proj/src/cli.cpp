// Copyright 2026 The HybridSched Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hybridsched/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "hybridsched/metrics.hpp"
#include "hybridsched/simulator.hpp"
#include "hybridsched/tracegen.hpp"

namespace hybridsched::cli {

using json = nlohmann::json;

namespace {

struct Globals {
  std::string server = "http://127.0.0.1:8080";
  std::string user;
  bool raw_json = false;
};

// Thrown to leave a subcommand with a specific exit code.
struct Exit {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Exit{kInput, "cannot read '" + path + "'"};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json_file(const std::string& path) {
  auto text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Exit{kInput, path + ": " + e.what()};
  }
}

std::string show(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

class Remote {
 public:
  explicit Remote(const Globals& g) : globals_(g), client_(g.server) {
    if (!client_.is_valid()) throw Exit{kInput, "invalid server url '" + g.server + "'"};
    client_.set_connection_timeout(3);
    client_.set_read_timeout(10);
  }

  // Returns the parsed body of a 2xx response. Anything else ends the command
  // with kRemote; in --json mode the raw body still goes to stdout first.
  json call(const std::string& method, const std::string& path, std::ostream& out,
            const std::string& body = {}) {
    httplib::Headers headers;
    if (!globals_.user.empty()) headers.emplace("X-User-Id", globals_.user);
    httplib::Result res;
    if (method == "GET") {
      res = client_.Get(path, headers);
    } else if (method == "POST") {
      res = client_.Post(path, headers, body, "application/json");
    } else {
      res = client_.Delete(path, headers);
    }
    if (!res) {
      throw Exit{kRemote, "cannot reach " + globals_.server + ": " +
                              httplib::to_string(res.error())};
    }
    raw_ = res->body;
    if (globals_.raw_json) out << raw_;
    json parsed;
    try {
      parsed = json::parse(raw_);
    } catch (const json::exception&) {
      throw Exit{kRemote, "server returned non-JSON body (HTTP " +
                              std::to_string(res->status) + ")"};
    }
    if (res->status >= 400) {
      std::string msg = "HTTP " + std::to_string(res->status);
      if (parsed.contains("error")) {
        const auto& e = parsed["error"];
        msg += " " + show(e.value("code", json(nullptr))) + ": " +
               show(e.value("message", json(nullptr)));
      }
      throw Exit{kRemote, msg};
    }
    return parsed;
  }

 private:
  const Globals& globals_;
  httplib::Client client_;
  std::string raw_;
};

void print_pairs(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& [k, _] : rows) width = std::max(width, k.size());
  for (const auto& [k, v] : rows) {
    out << k << std::string(width - k.size() + 2, ' ') << v << '\n';
  }
}

void print_status(std::ostream& out, json j) {
  std::vector<std::pair<std::string, std::string>> rows = {
      {"job_id", show(j["job_id"])},     {"name", show(j["name"])},
      {"user", show(j["user_id"])},      {"state", show(j["state"])},
      {"layer", show(j["layer"])},       {"submit_ms", show(j["submit_ms"])},
      {"start_ms", show(j["start_ms"])}, {"end_ms", show(j["end_ms"])},
  };
  if (j["start_ms"].is_number() && j["end_ms"].is_number()) {
    rows.emplace_back("duration_ms",
                      std::to_string(j["end_ms"].get<TimeMs>() - j["start_ms"].get<TimeMs>()));
  }
  if (j["allocation"].is_object()) {
    rows.emplace_back("cluster", show(j["allocation"]["cluster_id"]));
    rows.emplace_back("nodes", j["allocation"]["node_indices"].dump());
  }
  if (!j["worker_history"].empty()) rows.emplace_back("workers", j["worker_history"].dump());
  if (j.value("retries_used", 0) > 0) rows.emplace_back("retries", show(j["retries_used"]));
  print_pairs(out, rows);
}

void print_clusters(std::ostream& out, json j) {
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %-6s %6s %6s %6s %6s %6s %9s\n", "cluster", "kind",
                "nodes", "speed", "free", "busy", "down", "vcluster");
  out << line;
  for (auto c : j["clusters"]) {
    std::snprintf(line, sizeof line, "%-16s %-6s %6lld %6lld %6lld %6lld %6lld %9lld\n",
                  c["cluster_id"].get<std::string>().c_str(),
                  c["kind"].get<std::string>().c_str(),
                  c["node_count"].get<long long>(), c["speed_factor"].get<long long>(),
                  c["free"].get<long long>(), c["busy"].get<long long>(),
                  c["down"].get<long long>(), c["vcluster"].get<long long>());
    out << line;
  }
}

void print_metrics(std::ostream& out, json j) {
  auto& u = j["utilization"];
  char line[200];
  std::snprintf(line, sizeof line, "window [%lld, %lld) ms\n",
                u["window"]["from_ms"].get<long long>(), u["window"]["to_ms"].get<long long>());
  out << line;
  std::snprintf(line, sizeof line, "%-16s %16s %16s %14s %11s\n", "cluster", "busy_node_ms",
                "avail_node_ms", "vcluster_ms", "utilization");
  out << line;
  auto row = [&](json r) {
    std::snprintf(line, sizeof line, "%-16s %16lld %16lld %14lld %11s\n",
                  r["cluster_id"].get<std::string>().c_str(),
                  r["busy_node_ms"].get<long long>(), r["available_node_ms"].get<long long>(),
                  r["vcluster_node_ms"].get<long long>(),
                  r["utilization"].get<std::string>().c_str());
    out << line;
  };
  for (const auto& r : u["clusters"]) row(r);
  row(u["aggregate"]);
  auto& w = j["waits"];
  print_pairs(out, {{"jobs", show(w["jobs"])},
                    {"never_started", show(w["never_started"])},
                    {"mean_wait_ms", show(w["mean_wait_ms"])},
                    {"median_wait_ms", show(w["median_wait_ms"])},
                    {"p95_wait_ms", show(w["p95_wait_ms"])},
                    {"makespan_ms", show(w["makespan_ms"])}});
}

int simulate(const Globals& g, const std::string& trace_path, const std::string& cluster_path,
             std::optional<std::uint64_t> seed, const std::string& out_path, bool baseline,
             std::ostream& out) {
  ClusterFile topology;
  SubmissionTrace trace;
  try {
    topology = parse_cluster_file(parse_json_file(cluster_path));
    if (!trace_path.empty()) {
      trace = parse_trace(parse_json_file(trace_path));
      if (seed) trace.rng_seed = *seed;
    } else {
      trace = generate_trace(topology.clusters, TraceGenOptions{}, seed.value_or(1));
    }
  } catch (const Error& e) {
    throw Exit{kInput, e.what()};
  }

  Simulator sim(topology.clusters, topology.config);
  try {
    sim.load(trace);
  } catch (const Error& e) {
    throw Exit{kInput, e.what()};
  }
  try {
    sim.run();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonTerminating) throw Exit{kSimulation, e.what()};
    throw;
  }

  if (!out_path.empty()) {
    std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw Exit{kInput, "cannot write '" + out_path + "'"};
    write_canonical_jsonl(file, sim.log());
  }

  if (!baseline) {
    auto summary = summarize("run", sim.log(), topology.clusters);
    if (g.raw_json) {
      out << json{{"events", sim.log().size()},
                  {"utilization", to_json(summary.utilization)},
                  {"waits", to_json(summary.waits)}}
                 .dump()
          << '\n';
    } else {
      out << "events " << sim.log().size() << '\n'
          << render_table(summary.utilization, summary.waits);
    }
    return kOk;
  }

  Topology hybrid{"hybrid", topology.clusters, topology.config};
  Topology partitioned{"partitioned", topology.clusters, topology.config};
  partitioned.config.scheduler.partitioned = true;
  partitioned.config.scheduler.hybrid_rigid_on_cloud = false;
  Comparison cmp;
  try {
    cmp = compare(trace, partitioned, hybrid);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonTerminating) throw Exit{kSimulation, e.what()};
    throw Exit{kInput, e.what()};
  }
  if (g.raw_json) {
    out << to_json(cmp).dump() << '\n';
  } else {
    out << render_table(cmp);
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"HybridSched command-line client", "hsctl"};
  app.require_subcommand(1);
  Globals g;
  if (const char* env = std::getenv("HYBRIDSCHED_SERVER"); env && *env) g.server = env;
  if (const char* env = std::getenv("HYBRIDSCHED_USER"); env && *env) g.user = env;
  app.add_option("--server", g.server, "API base URL")->capture_default_str();
  app.add_option("--user", g.user, "User id sent in the auth header");
  app.add_flag("--json", g.raw_json, "Print the raw JSON body");
  app.fallthrough();

  std::string file;
  auto* submit = app.add_subcommand("submit", "Submit a job from a JobSpec JSON file");
  submit->add_option("-f,--file", file, "JobSpec file")->required();

  std::string job_id;
  auto* status = app.add_subcommand("status", "Show a job");
  status->add_option("job_id", job_id)->required();
  auto* cancel = app.add_subcommand("cancel", "Cancel a job");
  cancel->add_option("job_id", job_id)->required();
  auto* result = app.add_subcommand("result", "Show a finished job's result manifest");
  result->add_option("job_id", job_id)->required();

  auto* clusters = app.add_subcommand("clusters", "List clusters and node counts");

  std::int64_t window_ms = 0;
  auto* metrics = app.add_subcommand("metrics", "Utilization and wait statistics");
  metrics->add_option("--window-ms", window_ms, "Trailing window length")
      ->check(CLI::PositiveNumber);

  std::string trace_path, cluster_path, out_path;
  std::uint64_t seed = 0;
  bool compare_baseline = false;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a trace offline");
  simulate_cmd->add_option("--trace", trace_path, "Trace JSON (generated from --seed if absent)");
  simulate_cmd->add_option("--clusters", cluster_path, "Cluster file")->required();
  auto* seed_opt = simulate_cmd->add_option("--seed", seed, "Trace seed");
  simulate_cmd->add_option("--out", out_path, "Write the canonical event log here");
  simulate_cmd->add_flag("--compare-baseline", compare_baseline,
                         "Also run the statically partitioned baseline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*simulate_cmd) {
      std::optional<std::uint64_t> s;
      if (*seed_opt) s = seed;
      return simulate(g, trace_path, cluster_path, s, out_path, compare_baseline, out);
    }
    Remote remote(g);
    if (*submit) {
      auto text = read_file(file);
      json spec;
      try {
        spec = json::parse(text);
      } catch (const json::exception& e) {
        throw Exit{kInput, file + ": " + e.what()};
      }
      if (g.user.empty() && spec.is_object() && spec.contains("user_id") &&
          spec["user_id"].is_string()) {
        g.user = spec["user_id"].get<std::string>();
      }
      auto body = remote.call("POST", "/v1/jobs", out, text);
      if (!g.raw_json) out << show(body["job_id"]) << '\n';
    } else if (*status) {
      auto body = remote.call("GET", "/v1/jobs/" + job_id, out);
      if (!g.raw_json) print_status(out, body);
    } else if (*cancel) {
      auto body = remote.call("DELETE", "/v1/jobs/" + job_id, out);
      if (!g.raw_json) out << "job " << show(body["job_id"]) << ' ' << show(body["state"]) << '\n';
    } else if (*result) {
      auto body = remote.call("GET", "/v1/jobs/" + job_id + "/result", out);
      if (!g.raw_json) {
        print_pairs(out, {{"job_id", show(body["job_id"])},
                          {"terminal", show(body["terminal"])},
                          {"exit_status", show(body["exit_status"])},
                          {"start_ms", show(body["start_ms"])},
                          {"end_ms", show(body["end_ms"])},
                          {"duration_ms", show(body["duration_ms"])},
                          {"cluster", show(body["cluster_id"])},
                          {"nodes", body["nodes"].dump()},
                          {"credited_work_milli", show(body["credited_work_milli"])}});
      }
    } else if (*clusters) {
      auto body = remote.call("GET", "/v1/clusters", out);
      if (!g.raw_json) print_clusters(out, body);
    } else if (*metrics) {
      std::string path = "/v1/metrics";
      if (window_ms > 0) path += "?window_ms=" + std::to_string(window_ms);
      auto body = remote.call("GET", path, out);
      if (!g.raw_json) print_metrics(out, body);
    }
    return kOk;
  } catch (const Exit& e) {
    err << "hsctl: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    err << "hsctl: " << e.what() << '\n';
    return kInput;
  }
}

}  // namespace hybridsched::cli
