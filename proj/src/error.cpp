// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/error.hpp"

namespace rewod {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::BadMagic: return "bad magic";
    case ErrorCode::BadHeader: return "bad header";
    case ErrorCode::Truncated: return "truncated payload";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Config: return "invalid configuration";
    case ErrorCode::MissingData: return "missing data";
    case ErrorCode::Generation: return "generation failed";
    case ErrorCode::TrainingDiverged: return "training diverged";
    case ErrorCode::FitFailed: return "fit failed";
    case ErrorCode::EmptySamples: return "empty sample set";
    case ErrorCode::OutsideMap: return "box outside map";
    }
    return "unknown error";
}

ErrorCategory category(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Config:
        return ErrorCategory::Usage;
    case ErrorCode::TrainingDiverged:
    case ErrorCode::FitFailed:
        return ErrorCategory::Numerical;
    default:
        return ErrorCategory::Data;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace rewod
