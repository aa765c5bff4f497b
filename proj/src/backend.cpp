// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/backend.hpp"

#include <algorithm>

#include "cott/error.hpp"

namespace cott {

int SlotDistribution::argmax() const {
    int best = 0;
    for (int i = 1; i < probs.size(); ++i)
        if (probs(i) > probs(best)) best = i;
    return best;
}

double SlotDistribution::prob_of(const std::string& symbol) const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (symbols[i] == symbol) return probs(static_cast<Eigen::Index>(i));
    raise(ErrorCode::UnknownSymbol, symbol);
}

Eigen::VectorXd stable_softmax(const Eigen::VectorXd& logits) {
    Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
    return p / p.sum();
}

SlotDistribution Backend::score_slot(const Eigen::VectorXd& hidden,
                                     const Verbalizer& verbalizer) const {
    SlotDistribution dist;
    dist.symbols = verbalizer.symbols();
    dist.probs = score_entries(hidden, verbalizer.entries());
    return dist;
}

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    auto ensure = [&](const char* tok) {
        if (std::find(tokens_.begin(), tokens_.end(), tok) == tokens_.end())
            tokens_.emplace_back(tok);
    };
    ensure(kMaskToken);
    ensure(kUnkToken);
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (index_.count(tokens_[i]))
            raise(ErrorCode::InvalidConfig, "duplicate vocabulary token: " + tokens_[i]);
        index_[tokens_[i]] = static_cast<int>(i);
    }
    mask_id_ = index_[kMaskToken];
    unk_id_ = index_[kUnkToken];
}

int Vocab::id_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? unk_id_ : it->second;
}

}  // namespace cott
