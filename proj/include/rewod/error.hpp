// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rewod {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    Io,
    BadMagic,
    BadHeader,
    Truncated,
    NonFinite,
    Parse,
    Config,
    MissingData,
    Generation,
    TrainingDiverged,
    FitFailed,
    EmptySamples,
    OutsideMap,
};

// Coarse grouping used by the command line front end to pick an exit code.
enum class ErrorCategory { Usage, Data, Numerical };

std::string_view to_string(ErrorCode code);
ErrorCategory category(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace rewod
