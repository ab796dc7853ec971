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

#include "hybridsched/catalog.hpp"

namespace hybridsched {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "hybridsched-catalog-test";
  fs::create_directories(dir);
  auto p = dir / name;
  fs::remove(p);
  return p;
}

TEST(Catalog, RegisterAndResolveEverywhere) {
  DatasetCatalog cat;
  const auto& rec = cat.register_dataset("sdss_dr12", 1'000'000'000'000, 42);
  EXPECT_EQ(rec.size_bytes, 1'000'000'000'000);
  EXPECT_EQ(rec.registered_at_ms, 42);
  auto base = cat.resolve({"sdss_dr12"});
  for (auto kind : kAllKinds) EXPECT_EQ(cat.resolve_from(kind, {"sdss_dr12"}), base);
  EXPECT_THROW(cat.register_dataset("sdss_dr12", 1), Error);
  try {
    cat.register_dataset("sdss_dr12", 1);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateDataset);
  }
}

TEST(Catalog, ResolveIsAllOrNothing) {
  DatasetCatalog cat;
  EXPECT_TRUE(cat.resolve({}).empty());
  cat.register_dataset("a", 1);
  try {
    cat.resolve({"a", "missing"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingDataset);
    EXPECT_EQ(e.detail(), "missing");
  }
}

TEST(Catalog, RejectsEmptyNameAndNegativeSize) {
  DatasetCatalog cat;
  EXPECT_THROW(cat.register_dataset("", 1), Error);
  EXPECT_THROW(cat.register_dataset("x", -1), Error);
  EXPECT_TRUE(cat.records().empty());
}

TEST(Catalog, StagingDelay) {
  DatasetCatalog cat;
  auto big = cat.register_dataset("big", 1'000'000'000);
  auto tiny = cat.register_dataset("tiny", 3);
  EXPECT_EQ(cat.staging_delay_ms(big, "cpu"), 0);
  EXPECT_EQ(cat.staging_delay_ms(tiny, "cpu"), 0);
  cat.set_bandwidth("cpu", 1'000'000'000);
  EXPECT_EQ(cat.staging_delay_ms(big, "cpu"), 1000);
  cat.set_bandwidth("gpu", 2);
  EXPECT_EQ(cat.staging_delay_ms(tiny, "gpu"), 1500);
  EXPECT_EQ(cat.staging_delay_ms(tiny, "knl"), 0);
}

TEST(Catalog, PersistsAtomicallyAndReloads) {
  auto path = scratch("catalog.json");
  {
    DatasetCatalog cat(path);
    cat.register_dataset("sdss_dr12", 10, 5);
    cat.register_dataset("gaia_dr3", 20, 6);
  }
  EXPECT_TRUE(fs::exists(path));
  EXPECT_FALSE(fs::exists(fs::path(path.string() + ".tmp")));
  std::ifstream in(path);
  auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["gaia_dr3"]["size_bytes"], 20);
  EXPECT_EQ(j["sdss_dr12"]["registered_at_ms"], 5);

  DatasetCatalog again(path);
  EXPECT_EQ(again.records().size(), 2u);
  EXPECT_EQ(again.resolve({"gaia_dr3"})[0].size_bytes, 20);
}

TEST(Catalog, CorruptFileIsAParseError) {
  auto path = scratch("corrupt.json");
  std::ofstream(path) << "{\"x\": [";
  try {
    DatasetCatalog cat(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

}  // namespace
}  // namespace hybridsched
