// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include "layergraph/error.hpp"

namespace layergraph {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDtypeMismatch: return "DtypeMismatch";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingInput: return "MissingInput";
    case ErrorCode::kUnknownActivation: return "UnknownActivation";
    case ErrorCode::kInvalidProbability: return "InvalidProbability";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kDisconnectedInput: return "DisconnectedInput";
    case ErrorCode::kUnreachableDependency: return "UnreachableDependency";
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kUndeclaredInput: return "UndeclaredInput";
    case ErrorCode::kUnreachableDeclaredInput: return "UnreachableDeclaredInput";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kFeedArityMismatch: return "FeedArityMismatch";
    case ErrorCode::kFeedShapeMismatch: return "FeedShapeMismatch";
    case ErrorCode::kNonScalarLoss: return "NonScalarLoss";
    case ErrorCode::kNotInGraph: return "NotInGraph";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownKind: return "UnknownKind";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(message) {}

}  // namespace layergraph
