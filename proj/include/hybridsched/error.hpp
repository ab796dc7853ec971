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

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hybridsched {

/// Every failure the library can report. The service layer maps each value to
/// exactly one wire error (see wire_error()).
enum class ErrorCode {
  // job validation
  EmptyPreferences,
  DuplicatePreference,
  UnknownKind,
  BadShape,
  NonPositive,
  Overflow,
  InvalidTransition,
  ParseError,
  // scheduler
  DuplicateJob,
  UnknownJob,
  NoAllocation,
  AlreadyTerminal,
  NotElastic,
  NotRunning,
  Unsatisfiable,
  // simulator
  NonTerminating,
  UnknownNode,
  PastTime,
  InvalidInput,
  // cloud layer
  DuplicateUser,
  UnknownUser,
  ConcurrencyQuota,
  NodeQuota,
  UnroutableKind,
  InsufficientCloudCapacity,
  QuotaExceeded,
  UnknownVCluster,
  AlreadyReleased,
  // storage catalog
  DuplicateDataset,
  MissingDataset,
  // metrics
  EmptyWindow,
  // service
  NotFinished,
  Unauthenticated,
};

inline constexpr std::array kAllErrorCodes = {
    ErrorCode::EmptyPreferences,  ErrorCode::DuplicatePreference,
    ErrorCode::UnknownKind,       ErrorCode::BadShape,
    ErrorCode::NonPositive,       ErrorCode::Overflow,
    ErrorCode::InvalidTransition, ErrorCode::ParseError,
    ErrorCode::DuplicateJob,      ErrorCode::UnknownJob,
    ErrorCode::NoAllocation,      ErrorCode::AlreadyTerminal,
    ErrorCode::NotElastic,        ErrorCode::NotRunning,
    ErrorCode::Unsatisfiable,     ErrorCode::NonTerminating,
    ErrorCode::UnknownNode,       ErrorCode::PastTime,
    ErrorCode::InvalidInput,      ErrorCode::DuplicateUser,
    ErrorCode::UnknownUser,       ErrorCode::ConcurrencyQuota,
    ErrorCode::NodeQuota,         ErrorCode::UnroutableKind,
    ErrorCode::InsufficientCloudCapacity,
    ErrorCode::QuotaExceeded,     ErrorCode::UnknownVCluster,
    ErrorCode::AlreadyReleased,   ErrorCode::DuplicateDataset,
    ErrorCode::MissingDataset,    ErrorCode::EmptyWindow,
    ErrorCode::NotFinished,       ErrorCode::Unauthenticated,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code), detail_(detail) {}
  explicit Error(ErrorCode code)
      : std::runtime_error(std::string(to_string(code))), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace hybridsched
