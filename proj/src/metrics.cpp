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

#include "hybridsched/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace hybridsched {

namespace {
__extension__ typedef __int128 Wide;
}  // namespace

std::int64_t ClusterUtilization::basis_points() const {
  if (available_node_ms <= 0) return 0;
  Wide num = static_cast<Wide>(busy_node_ms) * 20000 + available_node_ms;
  return static_cast<std::int64_t>(num / (static_cast<Wide>(available_node_ms) * 2));
}

std::string ClusterUtilization::rendered() const {
  auto bp = basis_points();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%04lld", static_cast<long long>(bp / 10000),
                static_cast<long long>(bp % 10000));
  return buf;
}

namespace {

using Interval = std::pair<TimeMs, TimeMs>;

TimeMs overlap(TimeMs a, TimeMs b, TimeMs from, TimeMs to) {
  return std::max<TimeMs>(0, std::min(b, to) - std::max(a, from));
}

// Length of the union of intervals, clipped to [from, to).
TimeMs union_length(std::vector<Interval> spans, TimeMs from, TimeMs to) {
  std::sort(spans.begin(), spans.end());
  TimeMs total = 0;
  TimeMs cur_a = 0, cur_b = 0;
  bool open = false;
  for (auto [a, b] : spans) {
    a = std::max(a, from);
    b = std::min(b, to);
    if (a >= b) continue;
    if (open && a <= cur_b) {
      cur_b = std::max(cur_b, b);
      continue;
    }
    if (open) total += cur_b - cur_a;
    cur_a = a;
    cur_b = b;
    open = true;
  }
  if (open) total += cur_b - cur_a;
  return total;
}

}  // namespace

UtilizationReport utilization(const EventLog& log,
                              const std::vector<ClusterSpec>& clusters,
                              TimeMs from_ms, TimeMs to_ms,
                              const std::vector<VClusterInterval>& vclusters) {
  if (from_ms >= to_ms) {
    throw Error(ErrorCode::EmptyWindow,
                "[" + std::to_string(from_ms) + ", " + std::to_string(to_ms) + ")");
  }
  std::map<std::string, std::size_t> index;
  UtilizationReport report;
  report.from_ms = from_ms;
  report.to_ms = to_ms;
  auto sorted = clusters;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.cluster_id < b.cluster_id; });
  for (const auto& c : sorted) {
    index[c.cluster_id] = report.clusters.size();
    report.clusters.push_back({c.cluster_id});
  }

  // Per node: spans where it cannot be scheduled (down or carved out).
  std::vector<std::vector<std::vector<Interval>>> blocked(sorted.size());
  std::vector<std::vector<std::vector<Interval>>> carved(sorted.size());
  std::vector<std::vector<std::vector<Interval>>> down(sorted.size());
  for (std::size_t c = 0; c < sorted.size(); ++c) {
    auto n = static_cast<std::size_t>(sorted[c].node_count);
    blocked[c].resize(n);
    carved[c].resize(n);
    down[c].resize(n);
  }

  struct Holding {
    std::size_t cluster = 0;
    std::int64_t nodes = 0;
    TimeMs since = 0;
  };
  std::map<JobId, Holding> holding;
  std::map<std::pair<std::size_t, int>, std::pair<int, TimeMs>> down_state;

  auto close = [&](JobId job, TimeMs t) {
    auto it = holding.find(job);
    if (it == holding.end()) return;
    report.clusters[it->second.cluster].busy_node_ms +=
        it->second.nodes * overlap(it->second.since, t, from_ms, to_ms);
    holding.erase(it);
  };
  auto cluster_of = [&](const SimEvent& e) {
    auto it = index.find(e.cluster_id.value_or(""));
    if (it == index.end()) {
      throw Error(ErrorCode::InvalidInput,
                  "log references unknown cluster '" + e.cluster_id.value_or("") + "'");
    }
    return it->second;
  };

  for (const auto& e : log) {
    switch (e.kind) {
      case EventKind::JobStarted:
      case EventKind::RescaleApplied:
        close(*e.job_id, e.t_ms);
        holding[*e.job_id] = {cluster_of(e),
                              static_cast<std::int64_t>(e.nodes ? e.nodes->size() : 0),
                              e.t_ms};
        break;
      case EventKind::JobQueued:
      case EventKind::JobFinished:
      case EventKind::JobFailed:
      case EventKind::JobTimedOut:
      case EventKind::JobCancelled:
        close(*e.job_id, e.t_ms);
        break;
      case EventKind::NodeDown: {
        auto& st = down_state[{cluster_of(e), *e.node_index}];
        if (st.first++ == 0) st.second = e.t_ms;
        break;
      }
      case EventKind::NodeUp: {
        auto c = cluster_of(e);
        auto& st = down_state[{c, *e.node_index}];
        if (st.first > 0 && --st.first == 0) {
          down[c][static_cast<std::size_t>(*e.node_index)].push_back({st.second, e.t_ms});
        }
        break;
      }
      case EventKind::JobSubmitted:
        break;
    }
  }
  std::vector<JobId> open;
  for (const auto& [job, _] : holding) open.push_back(job);
  for (JobId job : open) close(job, to_ms);
  for (const auto& [key, st] : down_state) {
    if (st.first > 0) {
      down[key.first][static_cast<std::size_t>(key.second)].push_back({st.second, to_ms});
    }
  }
  for (const auto& vc : vclusters) {
    auto it = index.find(vc.cluster_id);
    if (it == index.end()) continue;
    for (int n : vc.node_indices) {
      carved[it->second][static_cast<std::size_t>(n)].push_back(
          {vc.from_ms, vc.to_ms.value_or(to_ms)});
    }
  }

  TimeMs window = to_ms - from_ms;
  for (std::size_t c = 0; c < sorted.size(); ++c) {
    auto& row = report.clusters[c];
    std::int64_t unavailable = 0;
    for (std::size_t n = 0; n < down[c].size(); ++n) {
      auto spans = down[c][n];
      spans.insert(spans.end(), carved[c][n].begin(), carved[c][n].end());
      unavailable += union_length(spans, from_ms, to_ms);
      row.down_node_ms += union_length(down[c][n], from_ms, to_ms);
      row.vcluster_node_ms += union_length(carved[c][n], from_ms, to_ms);
    }
    row.available_node_ms = sorted[c].node_count * window - unavailable;
    report.aggregate.busy_node_ms += row.busy_node_ms;
    report.aggregate.available_node_ms += row.available_node_ms;
    report.aggregate.down_node_ms += row.down_node_ms;
    report.aggregate.vcluster_node_ms += row.vcluster_node_ms;
  }
  report.aggregate.cluster_id = "*";
  return report;
}

TimeMs nearest_rank(const std::vector<TimeMs>& sorted, int percent) {
  if (sorted.empty()) return 0;
  auto n = static_cast<std::int64_t>(sorted.size());
  auto rank = std::max<std::int64_t>(1, ceil_div(percent * n, 100));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

WaitStats wait_stats(const EventLog& log) {
  std::map<JobId, TimeMs> submit, first_start, end;
  for (const auto& e : log) {
    if (!e.job_id) continue;
    JobId id = *e.job_id;
    if (e.kind == EventKind::JobSubmitted) submit.emplace(id, e.t_ms);
    if (e.kind == EventKind::JobStarted) first_start.emplace(id, e.t_ms);
    if (is_terminal_event(e.kind)) end[id] = e.t_ms;
  }
  WaitStats s;
  s.jobs = static_cast<std::int64_t>(submit.size());
  std::vector<TimeMs> waits;
  std::int64_t turnaround_sum = 0, turnaround_n = 0;
  for (const auto& [id, t_submit] : submit) {
    auto st = first_start.find(id);
    if (st == first_start.end()) {
      ++s.never_started;
      continue;
    }
    waits.push_back(st->second - t_submit);
    if (auto en = end.find(id); en != end.end()) {
      turnaround_sum += en->second - t_submit;
      ++turnaround_n;
    }
  }
  s.started = static_cast<std::int64_t>(waits.size());
  std::sort(waits.begin(), waits.end());
  if (!waits.empty()) {
    s.mean_wait_ms = static_cast<double>(std::accumulate(waits.begin(), waits.end(),
                                                         std::int64_t{0})) /
                     static_cast<double>(waits.size());
  }
  s.median_wait_ms = nearest_rank(waits, 50);
  s.p95_wait_ms = nearest_rank(waits, 95);
  if (turnaround_n > 0) {
    s.mean_turnaround_ms =
        static_cast<double>(turnaround_sum) / static_cast<double>(turnaround_n);
  }
  if (!submit.empty()) {
    s.first_submit_ms = std::min_element(submit.begin(), submit.end(),
                                         [](auto& a, auto& b) { return a.second < b.second; })
                            ->second;
  }
  if (!end.empty()) {
    s.last_end_ms = std::max_element(end.begin(), end.end(),
                                     [](auto& a, auto& b) { return a.second < b.second; })
                        ->second;
    s.makespan_ms = s.last_end_ms - s.first_submit_ms;
  }
  return s;
}

RunSummary summarize(std::string label, const EventLog& log,
                     const std::vector<ClusterSpec>& clusters) {
  RunSummary out;
  out.label = std::move(label);
  out.waits = wait_stats(log);
  if (out.waits.makespan_ms > 0) {
    out.utilization = utilization(log, clusters, out.waits.first_submit_ms,
                                  out.waits.last_end_ms);
  } else {
    for (const auto& c : clusters) out.utilization.clusters.push_back({c.cluster_id});
    std::sort(out.utilization.clusters.begin(), out.utilization.clusters.end(),
              [](auto& a, auto& b) { return a.cluster_id < b.cluster_id; });
    out.utilization.aggregate.cluster_id = "*";
  }
  return out;
}

Comparison compare(const SubmissionTrace& trace, const Topology& a,
                   const Topology& b) {
  Comparison out;
  auto run_a = run_trace(trace, a.clusters, a.config);
  auto run_b = run_trace(trace, b.clusters, b.config);
  out.a = summarize(a.label, run_a.log, a.clusters);
  out.b = summarize(b.label, run_b.log, b.clusters);
  out.utilization_delta_bp = out.b.utilization.aggregate.basis_points() -
                             out.a.utilization.aggregate.basis_points();
  out.mean_wait_delta_ms = out.b.waits.mean_wait_ms - out.a.waits.mean_wait_ms;
  out.makespan_delta_ms = out.b.waits.makespan_ms - out.a.waits.makespan_ms;
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

nlohmann::json row_json(const ClusterUtilization& row) {
  return {{"cluster_id", row.cluster_id},
          {"busy_node_ms", row.busy_node_ms},
          {"available_node_ms", row.available_node_ms},
          {"down_node_ms", row.down_node_ms},
          {"vcluster_node_ms", row.vcluster_node_ms},
          {"utilization", row.rendered()}};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string signed_bp(std::int64_t bp) {
  // basis points of a ratio, shown as percentage points with 2 decimals
  char buf[32];
  auto mag = bp < 0 ? -bp : bp;
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld pp", bp < 0 ? "-" : "+",
                static_cast<long long>(mag / 100), static_cast<long long>(mag % 100));
  return buf;
}

}  // namespace

nlohmann::json to_json(const UtilizationReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.clusters) rows.push_back(row_json(r));
  return {{"window", {{"from_ms", report.from_ms}, {"to_ms", report.to_ms}}},
          {"clusters", rows},
          {"aggregate", row_json(report.aggregate)}};
}

nlohmann::json to_json(const WaitStats& s) {
  return {{"jobs", s.jobs},
          {"started", s.started},
          {"never_started", s.never_started},
          {"mean_wait_ms", s.mean_wait_ms},
          {"median_wait_ms", s.median_wait_ms},
          {"p95_wait_ms", s.p95_wait_ms},
          {"mean_turnaround_ms", s.mean_turnaround_ms},
          {"makespan_ms", s.makespan_ms}};
}

nlohmann::json to_json(const Comparison& c) {
  auto side = [](const RunSummary& s) {
    return nlohmann::json{{"label", s.label},
                          {"utilization", to_json(s.utilization)},
                          {"waits", to_json(s.waits)}};
  };
  return {{"a", side(c.a)},
          {"b", side(c.b)},
          {"delta",
           {{"utilization_bp", c.utilization_delta_bp},
            {"mean_wait_ms", c.mean_wait_delta_ms},
            {"makespan_ms", c.makespan_delta_ms}}}};
}

std::string render_table(const UtilizationReport& report, const WaitStats& waits) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "window [%lld, %lld) ms\n",
                static_cast<long long>(report.from_ms),
                static_cast<long long>(report.to_ms));
  out << line;
  std::snprintf(line, sizeof line, "%-16s %16s %16s %14s %14s %11s\n", "cluster",
                "busy_node_ms", "avail_node_ms", "down_node_ms", "vcluster_ms",
                "utilization");
  out << line;
  auto row = [&](const ClusterUtilization& r) {
    std::snprintf(line, sizeof line, "%-16s %16lld %16lld %14lld %14lld %11s\n",
                  r.cluster_id.c_str(), static_cast<long long>(r.busy_node_ms),
                  static_cast<long long>(r.available_node_ms),
                  static_cast<long long>(r.down_node_ms),
                  static_cast<long long>(r.vcluster_node_ms), r.rendered().c_str());
    out << line;
  };
  for (const auto& r : report.clusters) row(r);
  row(report.aggregate);
  std::snprintf(line, sizeof line,
                "jobs %lld  started %lld  never_started %lld  mean_wait %s ms  "
                "median_wait %lld ms  p95_wait %lld ms  mean_turnaround %s ms  "
                "makespan %lld ms\n",
                static_cast<long long>(waits.jobs), static_cast<long long>(waits.started),
                static_cast<long long>(waits.never_started),
                fixed(waits.mean_wait_ms, 1).c_str(),
                static_cast<long long>(waits.median_wait_ms),
                static_cast<long long>(waits.p95_wait_ms),
                fixed(waits.mean_turnaround_ms, 1).c_str(),
                static_cast<long long>(waits.makespan_ms));
  out << line;
  return out.str();
}

std::string render_table(const Comparison& c) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %14s %14s %14s\n", "metric", c.a.label.c_str(),
                c.b.label.c_str(), "delta");
  out << line;
  const auto& ua = c.a.utilization.aggregate;
  const auto& ub = c.b.utilization.aggregate;
  std::snprintf(line, sizeof line, "%-22s %14s %14s %14s\n", "utilization",
                ua.rendered().c_str(), ub.rendered().c_str(),
                signed_bp(c.utilization_delta_bp).c_str());
  out << line;
  std::snprintf(line, sizeof line, "%-22s %14lld %14lld %+14lld\n", "busy_node_ms",
                static_cast<long long>(ua.busy_node_ms),
                static_cast<long long>(ub.busy_node_ms),
                static_cast<long long>(ub.busy_node_ms - ua.busy_node_ms));
  out << line;
  std::snprintf(line, sizeof line, "%-22s %14lld %14lld %+14lld\n", "available_node_ms",
                static_cast<long long>(ua.available_node_ms),
                static_cast<long long>(ub.available_node_ms),
                static_cast<long long>(ub.available_node_ms - ua.available_node_ms));
  out << line;
  std::snprintf(line, sizeof line, "%-22s %14s %14s %14s\n", "mean_wait_ms",
                fixed(c.a.waits.mean_wait_ms, 1).c_str(),
                fixed(c.b.waits.mean_wait_ms, 1).c_str(),
                fixed(c.mean_wait_delta_ms, 1).c_str());
  out << line;
  std::snprintf(line, sizeof line, "%-22s %14lld %14lld %+14lld\n", "makespan_ms",
                static_cast<long long>(c.a.waits.makespan_ms),
                static_cast<long long>(c.b.waits.makespan_ms),
                static_cast<long long>(c.makespan_delta_ms));
  out << line;
  return out.str();
}

}  // namespace hybridsched
