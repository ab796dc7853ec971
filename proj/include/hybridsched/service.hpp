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

// Request handling for the HTTP API, independent of the transport.
//
// Platform owns the simulator, the cloud layer and the dataset catalog. It is
// not thread-safe: the server funnels every call through one command stream.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hybridsched/catalog.hpp"
#include "hybridsched/cloud.hpp"
#include "hybridsched/metrics.hpp"
#include "hybridsched/simulator.hpp"

namespace hybridsched {

struct ApiError {
  std::string code;
  int http_status = 500;
};

/// Wire mapping for every error code. Total over ErrorCode.
ApiError wire_error(ErrorCode code);

struct ApiResponse {
  int status = 200;
  nlohmann::json body;

  std::string text() const { return body.dump(); }
};

/// {"error": {"code", "reason", "message"}} with the mapped status.
ApiResponse error_response(const Error& error);
ApiResponse error_response(ErrorCode code, const std::string& message);

struct PlatformConfig {
  std::vector<ClusterSpec> clusters;
  SimConfig sim;
  Quota default_quota;
  std::vector<UserAccount> users;  // created at startup
  std::optional<std::filesystem::path> catalog_path;
  std::map<std::string, std::int64_t> bandwidth;  // cluster_id -> bytes/s
  TimeMs provision_delay_ms = 0;
};

class Platform {
 public:
  explicit Platform(PlatformConfig config);

  // `user` is the value of the auth header, absent when not sent.
  ApiResponse submit_job(const std::optional<std::string>& user, const std::string& body);
  ApiResponse job_status(const std::string& id);
  ApiResponse job_result(const std::string& id);
  ApiResponse cancel_job(const std::string& id);
  ApiResponse list_clusters();
  /// Window [now - window_ms, now), clamped at 0. An empty window reports
  /// zeros. Without window_ms the window is the whole history.
  ApiResponse metrics(const std::optional<std::string>& window_ms);
  ApiResponse create_user(const std::string& body);
  ApiResponse create_vcluster(const std::optional<std::string>& user,
                              const std::string& body);
  ApiResponse release_vcluster(const std::string& id);

  /// Moves virtual time forward, processing due events.
  void advance_to(TimeMs t_ms);
  TimeMs now() const { return sim_.now(); }

  const Simulator& simulator() const { return sim_; }
  const CloudLayer& cloud() const { return cloud_; }
  DatasetCatalog& catalog() { return *catalog_; }

  /// Terminal job summary served by GET /v1/jobs/{id}/result.
  static nlohmann::json result_manifest(const JobRecord& record);
  std::vector<VClusterInterval> vcluster_intervals() const;

 private:
  UserUsage usage_of(const std::string& user_id) const;
  JobId parse_job_id(const std::string& id) const;

  PlatformConfig config_;
  std::unique_ptr<DatasetCatalog> catalog_;
  Simulator sim_;
  CloudLayer cloud_;
};

}  // namespace hybridsched
