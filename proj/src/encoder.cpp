// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/encoder.hpp"

#include <cmath>

#include "cott/error.hpp"
#include "cott/rng.hpp"

namespace cott {

namespace {

constexpr double kInitStd = 0.02;
constexpr double kLayerNormEps = 1e-5;

ag::Mat random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double std) {
    ag::Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = std * normal_double(rng);
    return m;
}

}  // namespace

ReferenceBackbone::ReferenceBackbone(BackboneConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      seed_(seed),
      vocab_(config_.vocab),
      virtual_rng_(mix_seed(seed, 0x76697274)) {
    if (config_.d_model <= 0 || config_.n_layers <= 0 || config_.n_heads <= 0 ||
        config_.d_ff <= 0 || config_.max_len <= 0)
        raise(ErrorCode::InvalidConfig, "backbone dimensions must be positive");
    if (config_.d_model % config_.n_heads != 0)
        raise(ErrorCode::InvalidConfig, "d_model must be divisible by n_heads");
    config_.vocab = vocab_.tokens();  // echo including specials

    const int d = config_.d_model;
    std::mt19937_64 rng(mix_seed(seed, 0x696e6974));

    embeddings_ = ag::parameter(random_matrix(rng, vocab_.size(), d, kInitStd));
    positional_ = ag::parameter(random_matrix(rng, config_.max_len, d, kInitStd));
    for (int l = 0; l < config_.n_layers; ++l) {
        Layer layer;
        layer.ln1_gamma = ag::parameter(ag::Mat::Ones(1, d));
        layer.ln1_beta = ag::parameter(ag::Mat::Zero(1, d));
        layer.wq = ag::parameter(random_matrix(rng, d, d, kInitStd));
        layer.bq = ag::parameter(ag::Mat::Zero(1, d));
        layer.wk = ag::parameter(random_matrix(rng, d, d, kInitStd));
        layer.bk = ag::parameter(ag::Mat::Zero(1, d));
        layer.wv = ag::parameter(random_matrix(rng, d, d, kInitStd));
        layer.bv = ag::parameter(ag::Mat::Zero(1, d));
        layer.wo = ag::parameter(random_matrix(rng, d, d, kInitStd));
        layer.bo = ag::parameter(ag::Mat::Zero(1, d));
        layer.ln2_gamma = ag::parameter(ag::Mat::Ones(1, d));
        layer.ln2_beta = ag::parameter(ag::Mat::Zero(1, d));
        layer.w_ff1 = ag::parameter(random_matrix(rng, d, config_.d_ff, kInitStd));
        layer.b_ff1 = ag::parameter(ag::Mat::Zero(1, config_.d_ff));
        layer.w_ff2 = ag::parameter(random_matrix(rng, config_.d_ff, d, kInitStd));
        layer.b_ff2 = ag::parameter(ag::Mat::Zero(1, d));
        layers_.push_back(std::move(layer));
    }
    final_gamma_ = ag::parameter(ag::Mat::Ones(1, d));
    final_beta_ = ag::parameter(ag::Mat::Zero(1, d));

    base_embedding_norm_mean_ = embeddings_->value.rowwise().norm().mean();
}

void ReferenceBackbone::bind_virtual_words(const std::vector<std::string>& identifiers) {
    if (identifiers.empty()) return;
    const int d = config_.d_model;
    const Eigen::Index old_rows = embeddings_->value.rows();
    if (embeddings_->grad.size() != 0)
        raise(ErrorCode::InvalidConfig, "cannot bind virtual words while gradients are live");
    embeddings_->value.conservativeResize(old_rows + static_cast<Eigen::Index>(identifiers.size()),
                                          d);
    Eigen::Index row = old_rows;
    for (const auto& id : identifiers) {
        if (virtual_rows_.count(id))
            raise(ErrorCode::InvalidConfig, "virtual word registered twice: " + id);
        Eigen::VectorXd z(d);
        for (int i = 0; i < d; ++i) z(i) = normal_double(virtual_rng_);
        double n = z.norm();
        embeddings_->value.row(row) = (z / (n > 0.0 ? n : 1.0)) * base_embedding_norm_mean_;
        virtual_rows_[id] = static_cast<int>(row);
        virtual_order_.push_back(id);
        ++row;
    }
}

int ReferenceBackbone::entry_row(const WordEntry& entry) const {
    if (entry.is_virtual) {
        auto it = virtual_rows_.find(entry.word);
        if (it == virtual_rows_.end())
            raise(ErrorCode::UnknownWord, "virtual word not bound: " + entry.word);
        return it->second;
    }
    int id = vocab_.id_of(entry.word);
    if (id == vocab_.unk_id() && entry.word != Vocab::kUnkToken)
        raise(ErrorCode::UnknownWord, "answer word not in vocabulary: " + entry.word);
    return id;
}

std::vector<int> ReferenceBackbone::token_ids(const PromptInstance& prompt) const {
    if (static_cast<int>(prompt.tokens.size()) > config_.max_len)
        raise(ErrorCode::SequenceTooLong,
              std::to_string(prompt.tokens.size()) + " tokens, maximum is " +
                  std::to_string(config_.max_len));
    std::vector<int> ids;
    ids.reserve(prompt.tokens.size());
    for (const auto& tok : prompt.tokens) {
        switch (tok.kind) {
            case PromptToken::Kind::Word: ids.push_back(vocab_.id_of(tok.word)); break;
            case PromptToken::Kind::Mask: ids.push_back(vocab_.mask_id()); break;
            case PromptToken::Kind::Entry: ids.push_back(entry_row(tok.entry)); break;
        }
    }
    return ids;
}

ag::ExprPtr ReferenceBackbone::forward(const std::vector<int>& ids) const {
    const int n = static_cast<int>(ids.size());
    const int d = config_.d_model;
    const int dh = d / config_.n_heads;
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));

    std::vector<int> positions(n);
    for (int i = 0; i < n; ++i) positions[i] = i;

    auto x = ag::add(ag::gather_rows(embeddings_, ids), ag::gather_rows(positional_, positions));
    for (const auto& layer : layers_) {
        auto a = ag::layer_norm(x, layer.ln1_gamma, layer.ln1_beta, kLayerNormEps);
        auto q = ag::add_row_broadcast(ag::matmul(a, layer.wq), layer.bq);
        auto k = ag::add_row_broadcast(ag::matmul(a, layer.wk), layer.bk);
        auto v = ag::add_row_broadcast(ag::matmul(a, layer.wv), layer.bv);
        std::vector<ag::ExprPtr> heads;
        heads.reserve(config_.n_heads);
        for (int h = 0; h < config_.n_heads; ++h) {
            auto qh = ag::slice_cols(q, h * dh, dh);
            auto kh = ag::slice_cols(k, h * dh, dh);
            auto vh = ag::slice_cols(v, h * dh, dh);
            auto scores = ag::scale(ag::matmul(qh, ag::transpose(kh)), att_scale);
            heads.push_back(ag::matmul(ag::softmax_rows(scores), vh));
        }
        auto attn = ag::add_row_broadcast(ag::matmul(ag::concat_cols(heads), layer.wo), layer.bo);
        x = ag::add(x, attn);
        auto b = ag::layer_norm(x, layer.ln2_gamma, layer.ln2_beta, kLayerNormEps);
        auto m1 = ag::gelu(ag::add_row_broadcast(ag::matmul(b, layer.w_ff1), layer.b_ff1));
        auto m2 = ag::add_row_broadcast(ag::matmul(m1, layer.w_ff2), layer.b_ff2);
        x = ag::add(x, m2);
    }
    return ag::layer_norm(x, final_gamma_, final_beta_, kLayerNormEps);
}

ReferenceBackbone::EncodeGraph ReferenceBackbone::encode_graph(const PromptInstance& prompt) const {
    auto hidden = forward(token_ids(prompt));
    EncodeGraph out;
    if (prompt.answer_position < 0)
        raise(ErrorCode::InvalidConfig, "prompt has no answer position");
    out.answer = ag::gather_rows(hidden, {prompt.answer_position});
    for (const auto& conv : prompt.convertibles)
        out.convertibles.push_back(ag::gather_rows(hidden, {conv.position}));
    return out;
}

ag::Mat ReferenceBackbone::hidden_states(const PromptInstance& prompt) const {
    ag::NoGradGuard no_grad;
    return forward(token_ids(prompt))->value;
}

EncodeResult ReferenceBackbone::encode(const PromptInstance& prompt) const {
    ag::NoGradGuard no_grad;
    auto graph = encode_graph(prompt);
    EncodeResult out;
    out.answer_hidden = graph.answer->value.row(0).transpose();
    for (const auto& conv : graph.convertibles)
        out.convertible_hidden.push_back(conv->value.row(0).transpose());
    return out;
}

ag::ExprPtr ReferenceBackbone::entry_logits(const ag::ExprPtr& hidden,
                                            const std::vector<WordEntry>& candidates) const {
    if (candidates.empty()) raise(ErrorCode::EmptyCandidateSet, "no candidate words");
    std::vector<int> rows;
    rows.reserve(candidates.size());
    for (const auto& c : candidates) rows.push_back(entry_row(c));
    return ag::matmul(hidden, ag::transpose(ag::gather_rows(embeddings_, rows)));
}

Eigen::VectorXd ReferenceBackbone::score_entries(const Eigen::VectorXd& hidden,
                                                 const std::vector<WordEntry>& candidates) const {
    if (candidates.empty()) raise(ErrorCode::EmptyCandidateSet, "no candidate words");
    if (hidden.size() != config_.d_model)
        raise(ErrorCode::DimensionMismatch, "hidden vector has wrong dimension");
    Eigen::VectorXd logits(static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t i = 0; i < candidates.size(); ++i)
        logits(static_cast<Eigen::Index>(i)) =
            embeddings_->value.row(entry_row(candidates[i])).dot(hidden);
    return stable_softmax(logits);
}

std::vector<std::pair<std::string, ag::ExprPtr>> ReferenceBackbone::named_parameters() const {
    std::vector<std::pair<std::string, ag::ExprPtr>> out;
    out.emplace_back("embeddings", embeddings_);
    out.emplace_back("positional", positional_);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        std::string p = "layer" + std::to_string(l) + ".";
        out.emplace_back(p + "ln1.gamma", layer.ln1_gamma);
        out.emplace_back(p + "ln1.beta", layer.ln1_beta);
        out.emplace_back(p + "attn.wq", layer.wq);
        out.emplace_back(p + "attn.bq", layer.bq);
        out.emplace_back(p + "attn.wk", layer.wk);
        out.emplace_back(p + "attn.bk", layer.bk);
        out.emplace_back(p + "attn.wv", layer.wv);
        out.emplace_back(p + "attn.bv", layer.bv);
        out.emplace_back(p + "attn.wo", layer.wo);
        out.emplace_back(p + "attn.bo", layer.bo);
        out.emplace_back(p + "ln2.gamma", layer.ln2_gamma);
        out.emplace_back(p + "ln2.beta", layer.ln2_beta);
        out.emplace_back(p + "ff.w1", layer.w_ff1);
        out.emplace_back(p + "ff.b1", layer.b_ff1);
        out.emplace_back(p + "ff.w2", layer.w_ff2);
        out.emplace_back(p + "ff.b2", layer.b_ff2);
    }
    out.emplace_back("final.gamma", final_gamma_);
    out.emplace_back("final.beta", final_beta_);
    return out;
}

std::vector<ag::ExprPtr> ReferenceBackbone::parameters() const {
    std::vector<ag::ExprPtr> out;
    for (auto& [name, p] : named_parameters()) out.push_back(p);
    return out;
}

std::int64_t ReferenceBackbone::parameter_count() const {
    std::int64_t n = 0;
    for (const auto& p : parameters()) n += p->value.size();
    return n;
}

}  // namespace cott
