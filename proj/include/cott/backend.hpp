// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <string>
#include <unordered_map>
#include <vector>

#include "cott/prompt.hpp"

namespace cott {

// Probabilities over an ordered candidate symbol list; always normalized.
struct SlotDistribution {
    std::vector<std::string> symbols;
    Eigen::VectorXd probs;

    int argmax() const;  // ties resolve to the lowest index
    double prob_of(const std::string& symbol) const;
};

// Numerically stabilized softmax (max subtraction).
Eigen::VectorXd stable_softmax(const Eigen::VectorXd& logits);

struct EncodeResult {
    Eigen::VectorXd answer_hidden;
    std::vector<Eigen::VectorXd> convertible_hidden;  // template order
};

// Masked-language-model abstraction: encodes a rendered prompt, exposes the
// hidden vectors at the role-tagged positions, and scores candidate answer
// words with a softmax restricted to the candidate set.
class Backend {
public:
    virtual ~Backend() = default;

    virtual int hidden_dim() const = 0;
    virtual int max_sequence_length() const = 0;
    virtual EncodeResult encode(const PromptInstance& prompt) const = 0;
    virtual Eigen::VectorXd score_entries(const Eigen::VectorXd& hidden,
                                          const std::vector<WordEntry>& candidates) const = 0;

    SlotDistribution score_slot(const Eigen::VectorXd& hidden, const Verbalizer& verbalizer) const;
};

// Closed whitespace vocabulary with <mask>/<unk> specials.
class Vocab {
public:
    Vocab() = default;
    explicit Vocab(std::vector<std::string> tokens);

    int id_of(const std::string& token) const;  // unk for unseen tokens
    int mask_id() const { return mask_id_; }
    int unk_id() const { return unk_id_; }
    int size() const { return static_cast<int>(tokens_.size()); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    static constexpr const char* kMaskToken = "<mask>";
    static constexpr const char* kUnkToken = "<unk>";

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
    int mask_id_ = -1;
    int unk_id_ = -1;
};

}  // namespace cott
