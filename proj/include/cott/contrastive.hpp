// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "cott/autograd.hpp"

namespace cott {

// Two-layer projection head z = W2 * relu(W1 * h), no bias terms.
// d_proj and the hidden width both equal the backbone hidden size.
class ProjectionHead {
public:
    ProjectionHead() = default;
    ProjectionHead(int dim, std::uint64_t seed);

    Eigen::VectorXd project(const Eigen::VectorXd& h) const;
    ag::ExprPtr project_graph(const ag::ExprPtr& h) const;  // h: 1 x d

    const ag::ExprPtr& w1() const { return w1_; }
    const ag::ExprPtr& w2() const { return w2_; }
    std::vector<std::pair<std::string, ag::ExprPtr>> named_parameters() const;
    int dim() const { return dim_; }

    // Test hook: wraps existing weight matrices.
    static ProjectionHead from_weights(ag::Mat w1, ag::Mat w2);

private:
    int dim_ = 0;
    ag::ExprPtr w1_, w2_;
};

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// -log( e^{sim(anchor,pos)/tau} / (e^{sim(anchor,pos)/tau} + e^{sim(anchor,neg)/tau}) )
double contrastive_loss(const Eigen::VectorXd& z_anchor, const Eigen::VectorXd& z_pos,
                        const Eigen::VectorXd& z_neg, double temperature);

// Graph builders used by the trainer; vectors are 1 x d row nodes.
ag::ExprPtr cosine_similarity_graph(const ag::ExprPtr& a, const ag::ExprPtr& b);
ag::ExprPtr contrastive_loss_graph(const ag::ExprPtr& z_anchor, const ag::ExprPtr& z_pos,
                                   const ag::ExprPtr& z_neg, double temperature);

}  // namespace cott
