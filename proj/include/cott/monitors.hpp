// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cott/reasoner.hpp"

namespace cott {

struct MonitorFlags {
    bool m1 = false;  // self-consistency of the two label predictions
    bool m2 = false;  // correctness of the predicted intermediate step
};

struct GoldRecord {
    std::string id;
    std::vector<std::string> step;
    std::string label;
};

struct MonitorVerdict {
    std::string id;
    bool m1_inconsistent = false;
    std::optional<bool> m2_wrong_step;
    bool accepted = true;  // no active monitor flagged this trace
};

struct ScopeMetrics {
    int count = 0;
    std::optional<double> accuracy;
    std::optional<double> micro_f1;
    std::optional<double> macro_f1;
    std::optional<double> hamming;
};

struct FilteredReport {
    int total = 0;
    int accepted = 0;
    int flagged = 0;
    double coverage = 0.0;
    // decision histogram: consistent/inconsistent x correct/incorrect step
    // (the step axis only when gold steps are available)
    std::map<std::string, int> decision_histogram;
    ScopeMetrics unfiltered;
    ScopeMetrics filtered;
};

struct MonitorOutcome {
    std::vector<MonitorVerdict> verdicts;
    FilteredReport report;
};

// Evaluation-time anomaly detection: verdicts never alter predictions, only
// the reporting scope. M2 requires gold intermediate steps.
MonitorOutcome apply_monitors(const std::vector<ReasoningTrace>& traces,
                              const std::optional<std::vector<GoldRecord>>& golds,
                              MonitorFlags flags);

nlohmann::json report_to_json(const MonitorOutcome& outcome);

}  // namespace cott
