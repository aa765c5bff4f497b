// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/monitors.hpp"

#include <nlohmann/json.hpp>

#include "cott/error.hpp"
#include "cott/metrics.hpp"

namespace cott {

using nlohmann::json;

namespace {

ScopeMetrics scope_metrics(const std::vector<const ReasoningTrace*>& traces,
                           const std::vector<const GoldRecord*>& golds) {
    ScopeMetrics out;
    out.count = static_cast<int>(traces.size());
    if (traces.empty() || golds.empty()) return out;

    std::vector<std::string> preds, gold_labels;
    std::vector<std::vector<std::string>> pred_tuples, gold_tuples;
    long correct = 0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        preds.push_back(traces[i]->label_pred);
        gold_labels.push_back(golds[i]->label);
        if (traces[i]->label_pred == golds[i]->label) ++correct;
        std::vector<std::string> pt = traces[i]->step_pred;
        pt.push_back(traces[i]->label_pred);
        std::vector<std::string> gt = golds[i]->step;
        gt.push_back(golds[i]->label);
        pred_tuples.push_back(std::move(pt));
        gold_tuples.push_back(std::move(gt));
    }
    out.accuracy = static_cast<double>(correct) / traces.size();

    // label set: trace candidates plus any gold symbols outside them
    std::vector<std::string> labels = traces.front()->label_rectified.symbols;
    for (const auto& g : gold_labels)
        if (std::find(labels.begin(), labels.end(), g) == labels.end()) labels.push_back(g);
    F1Result f1 = micro_macro_f1(preds, gold_labels, labels);
    out.micro_f1 = f1.micro;
    out.macro_f1 = f1.macro;
    out.hamming = hamming_loss(pred_tuples, gold_tuples);
    return out;
}

}  // namespace

MonitorOutcome apply_monitors(const std::vector<ReasoningTrace>& traces,
                              const std::optional<std::vector<GoldRecord>>& golds,
                              MonitorFlags flags) {
    if (flags.m2 && !golds)
        raise(ErrorCode::MissingGoldSteps, "monitor M2 needs gold intermediate steps");
    if (golds && golds->size() != traces.size())
        raise(ErrorCode::LengthMismatch, std::to_string(traces.size()) + " traces vs " +
                                             std::to_string(golds->size()) + " gold records");
    if (golds)
        for (std::size_t i = 0; i < traces.size(); ++i)
            if ((*golds)[i].id != traces[i].id)
                raise(ErrorCode::LengthMismatch,
                      "trace/gold id mismatch at index " + std::to_string(i) + ": " +
                          traces[i].id + " vs " + (*golds)[i].id);

    MonitorOutcome out;
    out.report.total = static_cast<int>(traces.size());
    std::vector<const ReasoningTrace*> accepted_traces;
    std::vector<const GoldRecord*> accepted_golds;
    std::vector<const ReasoningTrace*> all_traces;
    std::vector<const GoldRecord*> all_golds;

    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& trace = traces[i];
        MonitorVerdict verdict;
        verdict.id = trace.id;
        verdict.m1_inconsistent = trace.label_pred_step1 != trace.label_pred_step2;
        if (golds) verdict.m2_wrong_step = trace.step_pred != (*golds)[i].step;

        bool flagged = (flags.m1 && verdict.m1_inconsistent) ||
                       (flags.m2 && verdict.m2_wrong_step.value_or(false));
        verdict.accepted = !flagged;

        std::string key = verdict.m1_inconsistent ? "inconsistent" : "consistent";
        if (verdict.m2_wrong_step.has_value())
            key += *verdict.m2_wrong_step ? "_incorrect_step" : "_correct_step";
        out.report.decision_histogram[key] += 1;

        all_traces.push_back(&trace);
        if (golds) all_golds.push_back(&(*golds)[i]);
        if (verdict.accepted) {
            accepted_traces.push_back(&trace);
            if (golds) accepted_golds.push_back(&(*golds)[i]);
        }
        out.verdicts.push_back(std::move(verdict));
    }

    out.report.accepted = static_cast<int>(accepted_traces.size());
    out.report.flagged = out.report.total - out.report.accepted;
    out.report.coverage =
        out.report.total == 0 ? 0.0
                              : static_cast<double>(out.report.accepted) / out.report.total;
    out.report.unfiltered = scope_metrics(all_traces, all_golds);
    out.report.filtered = scope_metrics(accepted_traces, accepted_golds);
    return out;
}

nlohmann::json report_to_json(const MonitorOutcome& outcome) {
    auto scope = [](const ScopeMetrics& m) {
        json j;
        j["count"] = m.count;
        if (m.accuracy) j["accuracy"] = *m.accuracy;
        if (m.micro_f1) j["micro_f1"] = *m.micro_f1;
        if (m.macro_f1) j["macro_f1"] = *m.macro_f1;
        if (m.hamming) j["hamming_loss"] = *m.hamming;
        return j;
    };
    json j;
    j["total"] = outcome.report.total;
    j["accepted"] = outcome.report.accepted;
    j["flagged"] = outcome.report.flagged;
    j["coverage"] = outcome.report.coverage;
    j["decision_histogram"] = outcome.report.decision_histogram;
    j["unfiltered"] = scope(outcome.report.unfiltered);
    j["filtered"] = scope(outcome.report.filtered);
    return j;
}

}  // namespace cott
