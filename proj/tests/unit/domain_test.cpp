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

#include <limits>
#include <random>
#include <set>

#include "hybridsched/domain.hpp"
#include "oracles.hpp"

namespace hybridsched {
namespace {

JobSpec gpu_job() {
  JobSpec s;
  s.name = "fit";
  s.user_id = "alice";
  s.kind_preferences = {ResourceKind::Gpu};
  s.shape = RigidShape{2};
  s.work_units = 100;
  s.walltime_limit_ms = 10000;
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidInput;
}

TEST(ResourceKind, RoundTrips) {
  for (auto k : kAllKinds) EXPECT_EQ(parse_kind(to_string(k)), k);
  EXPECT_EQ(code_of([] { parse_kind("tpu"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_kind("GPU"); }), ErrorCode::ParseError);
}

TEST(ValidateJob, AcceptsValidSpec) {
  auto spec = gpu_job();
  auto out = validate_job(spec, {ResourceKind::Cpu, ResourceKind::Gpu});
  EXPECT_EQ(to_json(out), to_json(spec));
}

TEST(ValidateJob, RejectsUnofferedKind) {
  auto spec = gpu_job();
  spec.kind_preferences = {ResourceKind::Knl};
  EXPECT_EQ(code_of([&] { validate_job(spec, {ResourceKind::Cpu, ResourceKind::Gpu}); }),
            ErrorCode::UnknownKind);
}

TEST(ValidateJob, RejectsInvertedElasticShape) {
  auto spec = gpu_job();
  spec.kind_preferences = {ResourceKind::Cloud};
  spec.shape = ElasticShape{4, 2};
  EXPECT_EQ(code_of([&] { validate_job(spec, {ResourceKind::Cloud}); }), ErrorCode::BadShape);
}

TEST(ValidateJob, RejectsEachBrokenField) {
  std::set<ResourceKind> all(kAllKinds.begin(), kAllKinds.end());
  auto s = gpu_job();
  s.kind_preferences.clear();
  EXPECT_EQ(code_of([&] { validate_job(s, all); }), ErrorCode::EmptyPreferences);
  s = gpu_job();
  s.kind_preferences = {ResourceKind::Gpu, ResourceKind::Gpu};
  EXPECT_EQ(code_of([&] { validate_job(s, all); }), ErrorCode::DuplicatePreference);
  s = gpu_job();
  s.work_units = 0;
  EXPECT_EQ(code_of([&] { validate_job(s, all); }), ErrorCode::NonPositive);
  s = gpu_job();
  s.walltime_limit_ms = -5;
  EXPECT_EQ(code_of([&] { validate_job(s, all); }), ErrorCode::NonPositive);
  s = gpu_job();
  s.shape = RigidShape{0};
  EXPECT_EQ(code_of([&] { validate_job(s, all); }), ErrorCode::NonPositive);
  s = gpu_job();
  s.shape = ElasticShape{1, 4};  // elastic needs cloud among preferences
  EXPECT_EQ(code_of([&] { validate_job(s, all); }), ErrorCode::BadShape);
}

TEST(Transition, TableExamples) {
  EXPECT_EQ(transition(JobState::Queued, LifecycleEvent::Scheduled), JobState::Dispatched);
  EXPECT_EQ(code_of([] { transition(JobState::Completed, LifecycleEvent::CancelRequested); }),
            ErrorCode::InvalidTransition);
  EXPECT_EQ(transition(JobState::Running, LifecycleEvent::NodeLost, false), JobState::Failed);
}

TEST(Transition, MatchesHandWrittenTable) {
  int matches = 0;
  for (std::size_t s = 0; s < kAllStates.size(); ++s) {
    for (std::size_t e = 0; e < kAllEvents.size(); ++e) {
      auto got = oracle::library_verdict(kAllStates[s], kAllEvents[e]);
      EXPECT_EQ(got, oracle::kTransitionTable[s][e])
          << to_string(kAllStates[s]) << " x " << to_string(kAllEvents[e]);
      matches += got == oracle::kTransitionTable[s][e];
    }
  }
  EXPECT_EQ(matches, 64);
}

TEST(Transition, TerminalStatesAbsorb) {
  for (auto s : kAllStates) {
    if (!is_terminal(s)) continue;
    for (auto e : kAllEvents) {
      for (bool retry : {true, false}) {
        EXPECT_EQ(code_of([&] { transition(s, e, retry); }), ErrorCode::InvalidTransition);
      }
    }
  }
}

TEST(Duration, Examples) {
  EXPECT_EQ(job_duration_ms(100, 10, 2), 5000);
  EXPECT_EQ(job_duration_ms(1, 1000, 1000), 1);
  // 7000 / 6 = 1166.67 rounds up
  EXPECT_EQ(job_duration_ms(7, 3, 2), (7000 + 6 - 1) / 6);
  EXPECT_EQ(job_duration_ms(7, 3, 2), 1167);
}

TEST(Duration, RejectsBadArguments) {
  EXPECT_EQ(code_of([] { job_duration_ms(0, 1, 1); }), ErrorCode::NonPositive);
  EXPECT_EQ(code_of([] { job_duration_ms(1, 0, 1); }), ErrorCode::NonPositive);
  EXPECT_EQ(code_of([] { job_duration_ms(1, 1, -1); }), ErrorCode::NonPositive);
  auto big = std::numeric_limits<std::int64_t>::max() / 10;
  EXPECT_EQ(code_of([&] { job_duration_ms(big, 1, 1); }), ErrorCode::Overflow);
  EXPECT_EQ(code_of([&] { job_duration_ms(1, big, 100); }), ErrorCode::Overflow);
}

TEST(Duration, MonotoneAndCeilingProperties) {
  std::mt19937_64 rng(7);
  auto draw = [&](std::int64_t hi) {
    return static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi)) + 1;
  };
  for (int i = 0; i < 5000; ++i) {
    auto w = draw(1'000'000), s = draw(1000), n = draw(1000);
    auto d = job_duration_ms(w, s, n);
    ASSERT_GE(d, 1);
    EXPECT_LE(job_duration_ms(w, s + 1, n), d);
    EXPECT_LE(job_duration_ms(w, s, n + 1), d);
    EXPECT_GE(job_duration_ms(w + 1, s, n), d);
    // ceiling definition
    EXPECT_GE(s * n * d, 1000 * w);
    EXPECT_GT(1000 * w, s * n * (d - 1));
  }
}

TEST(JobSpecJson, RoundTripsAndIsStrict) {
  auto spec = gpu_job();
  spec.dataset_refs = {"sdss_dr12"};
  spec.priority = 3;
  auto j = to_json(spec);
  EXPECT_EQ(to_json(parse_job_spec(j)), j);
  EXPECT_EQ(j["shape"], nlohmann::json::parse(R"({"rigid":{"node_count":2}})"));

  auto extra = j;
  extra["colour"] = "blue";
  EXPECT_EQ(code_of([&] { parse_job_spec(extra); }), ErrorCode::ParseError);
  auto missing = j;
  missing.erase("work_units");
  EXPECT_EQ(code_of([&] { parse_job_spec(missing); }), ErrorCode::ParseError);
  auto wrong = j;
  wrong["work_units"] = "ten";
  EXPECT_EQ(code_of([&] { parse_job_spec(wrong); }), ErrorCode::ParseError);
  auto bad_kind = j;
  bad_kind["kind_preferences"] = {"quantum"};
  EXPECT_EQ(code_of([&] { parse_job_spec(bad_kind); }), ErrorCode::ParseError);

  auto elastic = nlohmann::json::parse(R"({"name":"e","user_id":"u","kind_preferences":["cloud"],
      "shape":{"elastic":{"min_workers":1,"max_workers":8}},"work_units":5,"walltime_limit_ms":9})");
  auto parsed = parse_job_spec(elastic);
  ASSERT_TRUE(is_elastic(parsed.shape));
  EXPECT_EQ(std::get<ElasticShape>(parsed.shape).max_workers, 8);
  EXPECT_EQ(parsed.priority, 0);
  EXPECT_TRUE(parsed.dataset_refs.empty());
}

TEST(ClusterSpecs, Validation) {
  std::vector<ClusterSpec> ok = {{"a", ResourceKind::Cpu, 2, 1, 1}};
  EXPECT_NO_THROW(validate_clusters(ok));
  auto dup = ok;
  dup.push_back(ok[0]);
  EXPECT_EQ(code_of([&] { validate_clusters(dup); }), ErrorCode::InvalidInput);
  auto zero = ok;
  zero[0].node_count = 0;
  EXPECT_EQ(code_of([&] { validate_clusters(zero); }), ErrorCode::NonPositive);
  auto slow = ok;
  slow[0].speed_factor = 0;
  EXPECT_EQ(code_of([&] { validate_clusters(slow); }), ErrorCode::NonPositive);
}

TEST(Errors, NamesAreUnique) {
  std::set<std::string_view> names;
  for (auto c : kAllErrorCodes) names.insert(to_string(c));
  EXPECT_EQ(names.size(), kAllErrorCodes.size());
}

}  // namespace
}  // namespace hybridsched
