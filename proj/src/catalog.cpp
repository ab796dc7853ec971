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

#include "hybridsched/catalog.hpp"

#include <fstream>

namespace hybridsched {

DatasetCatalog::DatasetCatalog(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(*path_)) return;
  std::ifstream in(*path_);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path_->string() + ": " + e.what());
  }
  records_ = parse(j);
}

const DatasetRecord& DatasetCatalog::register_dataset(const std::string& name,
                                                      std::int64_t size_bytes,
                                                      TimeMs now_ms) {
  if (name.empty()) throw Error(ErrorCode::InvalidInput, "empty dataset name");
  if (size_bytes < 0) throw Error(ErrorCode::InvalidInput, "negative size");
  auto [it, inserted] =
      records_.try_emplace(name, DatasetRecord{name, size_bytes, now_ms});
  if (!inserted) throw Error(ErrorCode::DuplicateDataset, name);
  try {
    persist();
  } catch (...) {
    records_.erase(it);
    throw;
  }
  return it->second;
}

std::vector<DatasetRecord> DatasetCatalog::resolve(
    const std::vector<std::string>& refs) const {
  std::vector<DatasetRecord> out;
  out.reserve(refs.size());
  for (const auto& name : refs) {
    auto it = records_.find(name);
    if (it == records_.end()) throw Error(ErrorCode::MissingDataset, name);
    out.push_back(it->second);
  }
  return out;
}

std::vector<DatasetRecord> DatasetCatalog::resolve_from(
    ResourceKind /*kind*/, const std::vector<std::string>& refs) const {
  return resolve(refs);
}

void DatasetCatalog::set_bandwidth(const std::string& cluster_id,
                                   std::int64_t bytes_per_s) {
  if (bytes_per_s < 1) throw Error(ErrorCode::NonPositive, "bandwidth");
  bandwidth_[cluster_id] = bytes_per_s;
}

TimeMs DatasetCatalog::staging_delay_ms(const DatasetRecord& dataset,
                                        const std::string& cluster_id) const {
  auto it = bandwidth_.find(cluster_id);
  if (it == bandwidth_.end()) return 0;
  std::int64_t milli = 0;
  if (__builtin_mul_overflow(dataset.size_bytes, std::int64_t{1000}, &milli)) {
    throw Error(ErrorCode::Overflow, "staging delay for " + dataset.name);
  }
  return ceil_div(milli, it->second);
}

nlohmann::json DatasetCatalog::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, rec] : records_) {
    j[name] = {{"size_bytes", rec.size_bytes},
               {"registered_at_ms", rec.registered_at_ms}};
  }
  return j;
}

std::map<std::string, DatasetRecord> DatasetCatalog::parse(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "catalog must be an object");
  std::map<std::string, DatasetRecord> out;
  for (const auto& [name, v] : j.items()) {
    if (!v.is_object() || !v.contains("size_bytes") ||
        !v["size_bytes"].is_number_integer()) {
      throw Error(ErrorCode::ParseError, "catalog entry '" + name + "'");
    }
    DatasetRecord rec{name, v["size_bytes"].get<std::int64_t>(), 0};
    if (v.contains("registered_at_ms")) {
      rec.registered_at_ms = v["registered_at_ms"].get<std::int64_t>();
    }
    out.emplace(name, rec);
  }
  return out;
}

void DatasetCatalog::persist() const {
  if (!path_) return;
  auto tmp = *path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << to_json().dump(2) << '\n';
    if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, *path_);
}

}  // namespace hybridsched
