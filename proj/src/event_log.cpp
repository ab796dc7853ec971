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

#include "hybridsched/event_log.hpp"

#include <array>
#include <istream>
#include <ostream>

namespace hybridsched {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 10> kKindNames = {{
    {EventKind::JobSubmitted, "JobSubmitted"},
    {EventKind::JobQueued, "JobQueued"},
    {EventKind::JobStarted, "JobStarted"},
    {EventKind::JobFinished, "JobFinished"},
    {EventKind::JobFailed, "JobFailed"},
    {EventKind::JobTimedOut, "JobTimedOut"},
    {EventKind::JobCancelled, "JobCancelled"},
    {EventKind::NodeDown, "NodeDown"},
    {EventKind::NodeUp, "NodeUp"},
    {EventKind::RescaleApplied, "RescaleApplied"},
}};

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

EventKind parse_event_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown event kind '" + std::string(text) + "'");
}

bool is_terminal_event(EventKind kind) {
  return kind == EventKind::JobFinished || kind == EventKind::JobFailed ||
         kind == EventKind::JobTimedOut || kind == EventKind::JobCancelled;
}

std::string to_canonical_line(const SimEvent& e) {
  std::string out;
  out.reserve(96);
  out += "{\"t\":";
  out += std::to_string(e.t_ms);
  out += ",\"seq\":";
  out += std::to_string(e.seq);
  out += ",\"kind\":\"";
  out += to_string(e.kind);
  out += '"';
  if (e.cluster_id) {
    out += ",\"cluster_id\":";
    out += nlohmann::json(*e.cluster_id).dump();
  }
  if (e.job_id) {
    out += ",\"job_id\":";
    out += std::to_string(*e.job_id);
  }
  if (e.node_index) {
    out += ",\"node_index\":";
    out += std::to_string(*e.node_index);
  }
  if (e.nodes) {
    out += ",\"nodes\":[";
    for (std::size_t i = 0; i < e.nodes->size(); ++i) {
      if (i) out += ',';
      out += std::to_string((*e.nodes)[i]);
    }
    out += ']';
  }
  if (e.workers) {
    out += ",\"workers\":";
    out += std::to_string(*e.workers);
  }
  out += '}';
  return out;
}

SimEvent parse_canonical_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, ex.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "event line is not an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "t" && key != "seq" && key != "kind" && key != "job_id" &&
        key != "cluster_id" && key != "node_index" && key != "nodes" && key != "workers") {
      throw Error(ErrorCode::ParseError, "unknown event field '" + key + "'");
    }
  }
  try {
    SimEvent e;
    e.t_ms = j.at("t").get<TimeMs>();
    e.seq = j.at("seq").get<std::int64_t>();
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    if (j.contains("job_id")) e.job_id = j["job_id"].get<JobId>();
    if (j.contains("cluster_id")) e.cluster_id = j["cluster_id"].get<std::string>();
    if (j.contains("node_index")) e.node_index = j["node_index"].get<int>();
    if (j.contains("nodes")) e.nodes = j["nodes"].get<std::vector<int>>();
    if (j.contains("workers")) e.workers = j["workers"].get<std::int64_t>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, ex.what());
  }
}

std::string to_canonical_jsonl(const EventLog& log) {
  std::string out;
  for (const auto& e : log) {
    out += to_canonical_line(e);
    out += '\n';
  }
  return out;
}

void write_canonical_jsonl(std::ostream& out, const EventLog& log) {
  for (const auto& e : log) out << to_canonical_line(e) << '\n';
}

EventLog read_canonical_jsonl(std::istream& in) {
  EventLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    log.push_back(parse_canonical_line(line));
  }
  return log;
}

}  // namespace hybridsched
