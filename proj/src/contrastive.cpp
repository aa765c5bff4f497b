// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/contrastive.hpp"

#include <cmath>

#include "cott/error.hpp"
#include "cott/rng.hpp"

namespace cott {

ProjectionHead::ProjectionHead(int dim, std::uint64_t seed) : dim_(dim) {
    if (dim <= 0) raise(ErrorCode::InvalidConfig, "projection dimension must be positive");
    std::mt19937_64 rng(mix_seed(seed, 0x70726f6a));
    // He-style scale for the relu hidden layer
    double std1 = std::sqrt(2.0 / dim);
    ag::Mat w1(dim, dim), w2(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) w1(r, c) = std1 * normal_double(rng);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) w2(r, c) = std1 * normal_double(rng);
    w1_ = ag::parameter(std::move(w1));
    w2_ = ag::parameter(std::move(w2));
}

ProjectionHead ProjectionHead::from_weights(ag::Mat w1, ag::Mat w2) {
    if (w1.rows() != w1.cols() || w2.cols() != w1.rows())
        raise(ErrorCode::DimensionMismatch, "projection weights must be d x d and d_proj x d");
    ProjectionHead head;
    head.dim_ = static_cast<int>(w1.rows());
    head.w1_ = ag::parameter(std::move(w1));
    head.w2_ = ag::parameter(std::move(w2));
    return head;
}

Eigen::VectorXd ProjectionHead::project(const Eigen::VectorXd& h) const {
    if (h.size() != dim_)
        raise(ErrorCode::DimensionMismatch, "hidden vector does not match projection head");
    return w2_->value * (w1_->value * h).cwiseMax(0.0);
}

ag::ExprPtr ProjectionHead::project_graph(const ag::ExprPtr& h) const {
    if (h->value.rows() != 1 || h->value.cols() != dim_)
        raise(ErrorCode::DimensionMismatch, "hidden node does not match projection head");
    // row-vector convention: z = relu(h W1^T) W2^T
    auto hidden = ag::relu(ag::matmul(h, ag::transpose(w1_)));
    return ag::matmul(hidden, ag::transpose(w2_));
}

std::vector<std::pair<std::string, ag::ExprPtr>> ProjectionHead::named_parameters() const {
    return {{"projection.w1", w1_}, {"projection.w2", w2_}};
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) raise(ErrorCode::DimensionMismatch, "cosine: sizes differ");
    double na = a.norm();
    double nb = b.norm();
    if (na == 0.0 || nb == 0.0) raise(ErrorCode::ZeroVector, "cosine undefined for zero vector");
    return a.dot(b) / (na * nb);
}

double contrastive_loss(const Eigen::VectorXd& z_anchor, const Eigen::VectorXd& z_pos,
                        const Eigen::VectorXd& z_neg, double temperature) {
    if (temperature <= 0.0)
        raise(ErrorCode::NonPositiveTemperature, std::to_string(temperature));
    double sim_pos = cosine_similarity(z_anchor, z_pos);
    double sim_neg = cosine_similarity(z_anchor, z_neg);
    // -log softmax == softplus of the logit gap, stable for any gap
    double gap = (sim_neg - sim_pos) / temperature;
    return gap > 0.0 ? gap + std::log1p(std::exp(-gap)) : std::log1p(std::exp(gap));
}

ag::ExprPtr cosine_similarity_graph(const ag::ExprPtr& a, const ag::ExprPtr& b) {
    if (a->value.norm() == 0.0 || b->value.norm() == 0.0)
        raise(ErrorCode::ZeroVector, "cosine undefined for zero vector");
    auto denom = ag::mul(ag::frobenius_norm(a), ag::frobenius_norm(b));
    return ag::divide(ag::dot(a, b), denom);
}

ag::ExprPtr contrastive_loss_graph(const ag::ExprPtr& z_anchor, const ag::ExprPtr& z_pos,
                                   const ag::ExprPtr& z_neg, double temperature) {
    if (temperature <= 0.0)
        raise(ErrorCode::NonPositiveTemperature, std::to_string(temperature));
    auto sim_pos = cosine_similarity_graph(z_anchor, z_pos);
    auto sim_neg = cosine_similarity_graph(z_anchor, z_neg);
    auto gap = ag::scale(ag::sub(sim_neg, sim_pos), 1.0 / temperature);
    return ag::softplus(gap);
}

}  // namespace cott
