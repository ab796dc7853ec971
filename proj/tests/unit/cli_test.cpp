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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "httplib.h"
#include "hybridsched/cli.hpp"
#include "hybridsched/server.hpp"

namespace hybridsched {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kData = HYBRIDSCHED_DATA_DIR;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome hsctl(std::vector<std::string> args) {
  args.insert(args.begin(), "hsctl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "hybridsched-cli-test";
  fs::create_directories(dir);
  return dir / name;
}

class CliAgainstServer : public ::testing::Test {
 protected:
  void SetUp() override {
    ServiceConfig cfg;
    cfg.platform.clusters = {fixtures::cluster("gpu", ResourceKind::Gpu, 4, 40),
                             fixtures::cluster("cpu", ResourceKind::Cpu, 4, 10)};
    UserAccount alice;
    alice.user_id = "alice";
    cfg.platform.users = {alice};
    cfg.port = 0;
    cfg.clock = ClockMode::Manual;
    server_ = std::make_unique<Server>(cfg);
    ASSERT_TRUE(server_->start());
    url_ = "http://127.0.0.1:" + std::to_string(server_->port());
  }
  void TearDown() override { server_->stop(); }

  std::string fetch(const std::string& path) {
    httplib::Client c("127.0.0.1", server_->port());
    return c.Get(path)->body;
  }

  std::unique_ptr<Server> server_;
  std::string url_;
};

TEST_F(CliAgainstServer, SubmitStatusResultCancel) {
  auto sub = hsctl({"--server", url_, "submit", "-f", kData + "/job_gpu.json"});
  ASSERT_EQ(sub.code, 0) << sub.err;
  auto id = sub.out.substr(0, sub.out.find_first_of(" \n"));
  ASSERT_FALSE(id.empty());
  EXPECT_EQ(id, "1");

  auto res = hsctl({"--server", url_, "result", id});
  EXPECT_EQ(res.code, 1);
  EXPECT_NE(res.err.find("not_finished"), std::string::npos);

  server_->advance_to(100000);
  auto st = hsctl({"--server", url_, "status", id});
  EXPECT_EQ(st.code, 0);
  EXPECT_NE(st.out.find("Completed"), std::string::npos);

  auto raw = hsctl({"--server", url_, "--json", "status", id});
  EXPECT_EQ(raw.code, 0);
  EXPECT_EQ(raw.out, fetch("/v1/jobs/" + id));

  auto again = hsctl({"--server", url_, "--json", "result", id});
  EXPECT_EQ(again.code, 0);
  EXPECT_EQ(again.out, fetch("/v1/jobs/" + id + "/result"));

  auto cancel = hsctl({"--server", url_, "cancel", id});
  EXPECT_EQ(cancel.code, 1);
  EXPECT_EQ(hsctl({"--server", url_, "status", "99"}).code, 1);

  auto sub2 = hsctl({"--server", url_, "submit", "-f", kData + "/job_gpu.json"});
  auto id2 = sub2.out.substr(0, sub2.out.find_first_of(" \n"));
  EXPECT_EQ(hsctl({"--server", url_, "cancel", id2}).code, 0);
  EXPECT_NE(hsctl({"--server", url_, "status", id2}).out.find("Cancelled"), std::string::npos);
}

TEST_F(CliAgainstServer, ClustersAndMetrics) {
  auto c = hsctl({"--server", url_, "clusters"});
  EXPECT_EQ(c.code, 0);
  EXPECT_NE(c.out.find("gpu"), std::string::npos);
  auto raw = hsctl({"--server", url_, "--json", "clusters"});
  EXPECT_EQ(raw.out, fetch("/v1/clusters"));
  auto m = hsctl({"--server", url_, "--json", "metrics", "--window-ms", "500"});
  EXPECT_EQ(m.code, 0);
  EXPECT_EQ(m.out, fetch("/v1/metrics?window_ms=500"));
  EXPECT_EQ(hsctl({"--server", url_, "metrics"}).code, 0);
}

TEST(Cli, InputErrors) {
  auto bad = scratch("bad.json");
  std::ofstream(bad) << "{not json";
  EXPECT_EQ(hsctl({"--server", "http://127.0.0.1:1", "submit", "-f", bad.string()}).code, 2);
  EXPECT_EQ(hsctl({"submit", "-f", "/nonexistent/job.json"}).code, 2);
  EXPECT_EQ(hsctl({"bogus"}).code, 2);
  EXPECT_EQ(hsctl({"simulate", "--clusters", "/nonexistent/clusters.json"}).code, 2);
  EXPECT_EQ(hsctl({"simulate", "--clusters", kData + "/clusters.json", "--trace", bad.string()}).code, 2);
}

TEST(Cli, UnreachableServer) {
  auto o = hsctl({"--server", "http://127.0.0.1:1", "submit", "-f", kData + "/job_gpu.json"});
  EXPECT_EQ(o.code, 1);
  EXPECT_FALSE(o.err.empty());
  EXPECT_EQ(hsctl({"--server", "http://127.0.0.1:1", "clusters"}).code, 1);
}

TEST(Cli, SimulateWritesReplayableLog) {
  auto out1 = scratch("demo1.jsonl");
  auto out2 = scratch("demo2.jsonl");
  auto a = hsctl({"simulate", "--clusters", kData + "/clusters.json", "--trace",
                  kData + "/demo_trace.json", "--out", out1.string()});
  ASSERT_EQ(a.code, 0) << a.err;
  auto b = hsctl({"simulate", "--clusters", kData + "/clusters.json", "--trace",
                  kData + "/demo_trace.json", "--out", out2.string()});
  ASSERT_EQ(b.code, 0);
  std::ifstream f1(out1), f2(out2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  EXPECT_FALSE(s1.str().empty());
  EXPECT_EQ(s1.str(), s2.str());
  std::istringstream replay(s1.str());
  EXPECT_EQ(to_canonical_jsonl(read_canonical_jsonl(replay)), s1.str());
}

TEST(Cli, SimulateFromSeed) {
  auto a = hsctl({"--json", "simulate", "--clusters", kData + "/clusters.json", "--seed", "7"});
  auto b = hsctl({"--json", "simulate", "--clusters", kData + "/clusters.json", "--seed", "7"});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, CompareBaselinePrintsBothSides) {
  auto o = hsctl({"--json", "simulate", "--clusters", kData + "/hybrid_clusters.json", "--trace",
                  kData + "/hybrid_trace.json", "--compare-baseline"});
  ASSERT_EQ(o.code, 0) << o.err;
  auto j = json::parse(o.out);
  EXPECT_EQ(j["delta"]["utilization_bp"], 4166);
}

TEST(Cli, NonTerminatingIsExit3) {
  auto clusters = scratch("tiny_horizon.json");
  std::ofstream(clusters) << R"({"clusters":[{"cluster_id":"c","kind":"cpu","node_count":1,
      "cores_per_node":1,"speed_factor":1}],"config":{"horizon_ms":1000}})";
  auto trace = scratch("long.json");
  std::ofstream(trace) << R"({"rng_seed":0,"faults":[],"jobs":[{"t_ms":0,"spec":{"name":"l",
      "user_id":"u","kind_preferences":["cpu"],"shape":{"rigid":{"node_count":1}},
      "work_units":1000,"walltime_limit_ms":100000000}}]})";
  auto o = hsctl({"simulate", "--clusters", clusters.string(), "--trace", trace.string()});
  EXPECT_EQ(o.code, 3) << o.err;
}

}  // namespace
}  // namespace hybridsched
