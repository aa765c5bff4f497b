// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace cott {

struct F1Result {
    double micro = 0.0;
    double macro = 0.0;
};

// Pooled-count micro F1 and unweighted macro F1 over `labels`. Classes never
// seen in preds or golds contribute F1 = 0 to the macro average.
F1Result micro_macro_f1(const std::vector<std::string>& preds,
                        const std::vector<std::string>& golds,
                        const std::vector<std::string>& labels);

struct RelationF1 {
    double f1 = 0.0;
    bool degenerate = false;  // no positive instance anywhere
};

// Micro F1 that ignores true negatives on the designated negative class
// (the usual convention for relation classification).
RelationF1 relation_f1(const std::vector<std::string>& preds,
                       const std::vector<std::string>& golds,
                       const std::string& negative_label);

// Fraction of mismatched tuple components over instances x arity.
double hamming_loss(const std::vector<std::vector<std::string>>& preds,
                    const std::vector<std::vector<std::string>>& golds);

}  // namespace cott
