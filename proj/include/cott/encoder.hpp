// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cott/autograd.hpp"
#include "cott/backend.hpp"

namespace cott {

struct BackboneConfig {
    std::vector<std::string> vocab;  // base tokens; specials are added if missing
    int d_model = 32;
    int n_layers = 2;
    int n_heads = 4;
    int d_ff = 128;
    int max_len = 64;
};

// Small bidirectional self-attention encoder trained from scratch: learned
// token + position embeddings, pre-norm transformer blocks, GELU feed-forward,
// final layer norm. Stands in for a pretrained masked language model at desk
// scale; anything implementing Backend can be plugged in instead.
class ReferenceBackbone final : public Backend {
public:
    ReferenceBackbone(BackboneConfig config, std::uint64_t seed);

    int hidden_dim() const override { return config_.d_model; }
    int max_sequence_length() const override { return config_.max_len; }
    EncodeResult encode(const PromptInstance& prompt) const override;
    Eigen::VectorXd score_entries(const Eigen::VectorXd& hidden,
                                  const std::vector<WordEntry>& candidates) const override;

    // Registers learnable virtual answer words. Each new row is a seeded
    // standard-normal draw rescaled to the mean norm of the base embedding
    // rows. Must happen before optimizer state is attached.
    void bind_virtual_words(const std::vector<std::string>& identifiers);

    struct EncodeGraph {
        ag::ExprPtr answer;                      // 1 x d
        std::vector<ag::ExprPtr> convertibles;   // 1 x d each, template order
    };
    EncodeGraph encode_graph(const PromptInstance& prompt) const;
    ag::ExprPtr entry_logits(const ag::ExprPtr& hidden,
                             const std::vector<WordEntry>& candidates) const;

    // Final hidden state for every position, one row per token.
    ag::Mat hidden_states(const PromptInstance& prompt) const;

    std::vector<std::pair<std::string, ag::ExprPtr>> named_parameters() const;
    std::vector<ag::ExprPtr> parameters() const;
    std::int64_t parameter_count() const;

    const BackboneConfig& config() const { return config_; }
    const Vocab& vocab() const { return vocab_; }
    const std::vector<std::string>& virtual_words() const { return virtual_order_; }
    std::uint64_t seed() const { return seed_; }

    int entry_row(const WordEntry& entry) const;

private:
    struct Layer {
        ag::ExprPtr ln1_gamma, ln1_beta;
        ag::ExprPtr wq, bq, wk, bk, wv, bv, wo, bo;
        ag::ExprPtr ln2_gamma, ln2_beta;
        ag::ExprPtr w_ff1, b_ff1, w_ff2, b_ff2;
    };

    std::vector<int> token_ids(const PromptInstance& prompt) const;
    ag::ExprPtr forward(const std::vector<int>& ids) const;  // n x d

    BackboneConfig config_;
    std::uint64_t seed_;
    Vocab vocab_;
    ag::ExprPtr embeddings_;  // (vocab + virtual) x d
    ag::ExprPtr positional_;  // max_len x d
    std::vector<Layer> layers_;
    ag::ExprPtr final_gamma_, final_beta_;
    std::vector<std::string> virtual_order_;
    std::unordered_map<std::string, int> virtual_rows_;
    std::mt19937_64 virtual_rng_;
    double base_embedding_norm_mean_ = 0.0;
};

}  // namespace cott
