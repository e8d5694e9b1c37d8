// Copyright 2026 The magbell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace magbell {

enum class ErrorKind {
    InvalidDimension,
    UnknownLabel,
    DimensionMismatch,
    SpaceMismatch,
    InvalidArgument,
    Truncation,
    NonHermitian,
    ZeroDetuning,
    RegimeViolation,
    NullOutcome,
    ZeroTargetOverlap,
    StepSize,
    TimeOutOfRange,
    OptimizerAbort,
    Config,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidDimension: return "invalid-dimension";
        case ErrorKind::UnknownLabel: return "unknown-label";
        case ErrorKind::DimensionMismatch: return "dimension-mismatch";
        case ErrorKind::SpaceMismatch: return "space-mismatch";
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::Truncation: return "truncation";
        case ErrorKind::NonHermitian: return "non-hermitian";
        case ErrorKind::ZeroDetuning: return "zero-detuning";
        case ErrorKind::RegimeViolation: return "regime-violation";
        case ErrorKind::NullOutcome: return "null-outcome";
        case ErrorKind::ZeroTargetOverlap: return "zero-target-overlap";
        case ErrorKind::StepSize: return "step-size";
        case ErrorKind::TimeOutOfRange: return "time-out-of-range";
        case ErrorKind::OptimizerAbort: return "optimizer-abort";
        case ErrorKind::Config: return "config";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

// Single exception type for the library; the kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace magbell
