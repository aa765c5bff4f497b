// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cott/reasoner.hpp"

namespace cott {

inline constexpr int kTraceSchemaVersion = 1;

nlohmann::json trace_to_json(const ReasoningTrace& trace);
ReasoningTrace trace_from_json(const nlohmann::json& j);

// One JSON object per line, probabilities at full precision.
std::string traces_to_jsonl(const std::vector<ReasoningTrace>& traces);
std::vector<ReasoningTrace> read_traces_jsonl(const std::string& path);

}  // namespace cott
