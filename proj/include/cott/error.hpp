// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace cott {

enum class ErrorCode {
    // prompt schema
    MalformedTemplate,
    EmptyText,
    ArityMismatch,
    UnknownSymbol,
    UnknownWord,
    // model backend
    SequenceTooLong,
    EmptyCandidateSet,
    DimensionMismatch,
    // reasoner
    NoCounterfactualAvailable,
    CandidateMismatch,
    SpaceTooLarge,
    // contrastive
    ZeroVector,
    NonPositiveTemperature,
    // data
    EmptyDataset,
    MissingField,
    UnknownLabel,
    SpanOutOfBounds,
    InvalidConfig,
    // metrics / monitors
    LengthMismatch,
    EmptyInput,
    MissingGoldSteps,
    // generic numeric precondition violation (e.g. confidence outside [0,1])
    PreconditionViolation,
    // checkpoints
    CorruptCheckpoint,
    VersionMismatch,
};

// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorCategory { Data, Checkpoint, Numeric };

constexpr ErrorCategory category_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyDataset:
        case ErrorCode::MissingField:
        case ErrorCode::UnknownLabel:
        case ErrorCode::SpanOutOfBounds:
        case ErrorCode::InvalidConfig:
            return ErrorCategory::Data;
        case ErrorCode::CorruptCheckpoint:
        case ErrorCode::VersionMismatch:
            return ErrorCategory::Checkpoint;
        default:
            return ErrorCategory::Numeric;
    }
}

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace cott
