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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hybridsched/domain.hpp"

namespace hybridsched {

struct DatasetRecord {
  std::string name;
  std::int64_t size_bytes = 0;
  TimeMs registered_at_ms = 0;

  bool operator==(const DatasetRecord&) const = default;
};

/// Dataset catalog on shared storage. Every cluster kind sees the same
/// records; the optional per-cluster bandwidth only affects staging delay.
///
/// When constructed with a path, the catalog is loaded from it and rewritten
/// (write to a temporary sibling, then rename) after every registration.
class DatasetCatalog {
 public:
  DatasetCatalog() = default;
  explicit DatasetCatalog(std::filesystem::path path);

  const DatasetRecord& register_dataset(const std::string& name,
                                        std::int64_t size_bytes,
                                        TimeMs now_ms = 0);
  /// All or nothing: throws MissingDataset naming the first unknown ref.
  std::vector<DatasetRecord> resolve(const std::vector<std::string>& refs) const;
  /// Same lookup from the point of view of a cluster kind. Storage is shared,
  /// so the kind does not change the answer.
  std::vector<DatasetRecord> resolve_from(ResourceKind kind,
                                          const std::vector<std::string>& refs) const;

  void set_bandwidth(const std::string& cluster_id, std::int64_t bytes_per_s);
  /// 0 unless the cluster has a configured bandwidth, then
  /// ceil(1000 * size_bytes / bandwidth).
  TimeMs staging_delay_ms(const DatasetRecord& dataset,
                          const std::string& cluster_id) const;

  const std::map<std::string, DatasetRecord>& records() const { return records_; }

  nlohmann::json to_json() const;
  static std::map<std::string, DatasetRecord> parse(const nlohmann::json& j);

 private:
  void persist() const;

  std::map<std::string, DatasetRecord> records_;
  std::map<std::string, std::int64_t> bandwidth_;
  std::optional<std::filesystem::path> path_;
};

}  // namespace hybridsched
