// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/metrics.hpp"

#include <map>

#include "cott/error.hpp"

namespace cott {

namespace {

struct Counts {
    long tp = 0, fp = 0, fn = 0;
};

double f1_from(long tp, long fp, long fn) {
    if (tp == 0) return 0.0;
    double precision = static_cast<double>(tp) / (tp + fp);
    double recall = static_cast<double>(tp) / (tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

F1Result micro_macro_f1(const std::vector<std::string>& preds,
                        const std::vector<std::string>& golds,
                        const std::vector<std::string>& labels) {
    if (preds.size() != golds.size())
        raise(ErrorCode::LengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                             std::to_string(golds.size()) + " golds");
    if (preds.empty()) raise(ErrorCode::EmptyInput, "no predictions");
    if (labels.empty()) raise(ErrorCode::EmptyInput, "empty label set");

    std::map<std::string, Counts> by_class;
    for (const auto& label : labels) by_class[label];
    for (std::size_t i = 0; i < preds.size(); ++i) {
        auto p = by_class.find(preds[i]);
        auto g = by_class.find(golds[i]);
        if (p == by_class.end())
            raise(ErrorCode::UnknownLabel, "prediction outside label set: " + preds[i]);
        if (g == by_class.end())
            raise(ErrorCode::UnknownLabel, "gold outside label set: " + golds[i]);
        if (preds[i] == golds[i]) {
            p->second.tp += 1;
        } else {
            p->second.fp += 1;
            g->second.fn += 1;
        }
    }

    long tp = 0, fp = 0, fn = 0;
    double macro_sum = 0.0;
    for (const auto& [label, c] : by_class) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
        macro_sum += f1_from(c.tp, c.fp, c.fn);
    }
    F1Result out;
    out.micro = f1_from(tp, fp, fn);
    out.macro = macro_sum / static_cast<double>(by_class.size());
    return out;
}

RelationF1 relation_f1(const std::vector<std::string>& preds,
                       const std::vector<std::string>& golds,
                       const std::string& negative_label) {
    if (preds.size() != golds.size())
        raise(ErrorCode::LengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                             std::to_string(golds.size()) + " golds");
    if (preds.empty()) raise(ErrorCode::EmptyInput, "no predictions");

    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        bool pred_pos = preds[i] != negative_label;
        bool gold_pos = golds[i] != negative_label;
        if (pred_pos && preds[i] == golds[i]) {
            tp += 1;
        } else {
            if (pred_pos) fp += 1;
            if (gold_pos) fn += 1;
        }
    }
    RelationF1 out;
    if (tp + fp == 0 && tp + fn == 0) {
        out.degenerate = true;  // nothing but true negatives; F1 undefined, report 0
        return out;
    }
    out.f1 = f1_from(tp, fp, fn);
    return out;
}

double hamming_loss(const std::vector<std::vector<std::string>>& preds,
                    const std::vector<std::vector<std::string>>& golds) {
    if (preds.size() != golds.size())
        raise(ErrorCode::LengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                             std::to_string(golds.size()) + " golds");
    if (preds.empty()) raise(ErrorCode::EmptyInput, "no predictions");
    const std::size_t arity = preds.front().size();
    if (arity == 0) raise(ErrorCode::ArityMismatch, "tuples must have positive arity");
    long mismatched = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].size() != arity || golds[i].size() != arity)
            raise(ErrorCode::ArityMismatch, "tuple arity differs at index " + std::to_string(i));
        for (std::size_t k = 0; k < arity; ++k)
            if (preds[i][k] != golds[i][k]) ++mismatched;
    }
    return static_cast<double>(mismatched) / (static_cast<double>(preds.size()) * arity);
}

}  // namespace cott
