// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/error.hpp"

namespace cott {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedTemplate: return "MalformedTemplate";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::ArityMismatch: return "ArityMismatch";
        case ErrorCode::UnknownSymbol: return "UnknownSymbol";
        case ErrorCode::UnknownWord: return "UnknownWord";
        case ErrorCode::SequenceTooLong: return "SequenceTooLong";
        case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NoCounterfactualAvailable: return "NoCounterfactualAvailable";
        case ErrorCode::CandidateMismatch: return "CandidateMismatch";
        case ErrorCode::SpaceTooLarge: return "SpaceTooLarge";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::SpanOutOfBounds: return "SpanOutOfBounds";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::MissingGoldSteps: return "MissingGoldSteps";
        case ErrorCode::PreconditionViolation: return "PreconditionViolation";
        case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
    }
    return "UnknownError";
}

}  // namespace cott
