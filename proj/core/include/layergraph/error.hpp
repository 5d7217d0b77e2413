// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace layergraph {

enum class ErrorCode {
  kShapeMismatch,
  kDtypeMismatch,
  kDomainError,
  kIndexOutOfRange,
  kInvalidRange,
  kInvalidArgument,
  kMissingInput,
  kUnknownActivation,
  kInvalidProbability,
  kArityMismatch,
  kDisconnectedInput,
  kUnreachableDependency,
  kCycleDetected,
  kUndeclaredInput,
  kUnreachableDeclaredInput,
  kDuplicateName,
  kFeedArityMismatch,
  kFeedShapeMismatch,
  kNonScalarLoss,
  kNotInGraph,
  kNonFiniteLoss,
  kEmptyDataset,
  kParseError,
  kUnknownKind,
  kIoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every library failure is reported as an Error carrying a stable code.
// what() is "<CodeName>: <message>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace layergraph
