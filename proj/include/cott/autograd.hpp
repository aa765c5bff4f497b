// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

namespace cott::ag {

using Mat = Eigen::MatrixXd;

// Dynamic reverse-mode graph over dense double matrices. Nodes are built by
// the free functions below; backward() propagates from a 1x1 root. Leaves
// created with parameter() persist across graphs, which is how shared model
// weights accumulate gradients from several forward passes of one loss.
class Expr {
public:
    Mat value;
    Mat grad;  // empty until first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Expr>> inputs;
    std::function<void(Expr&)> backward_fn;

    explicit Expr(Mat v, bool rg = false) : value(std::move(v)), requires_grad(rg) {}

    void accumulate(const Mat& g) {
        if (grad.size() == 0) grad = Mat::Zero(value.rows(), value.cols());
        grad += g;
    }
    void zero_grad() { grad.resize(0, 0); }
};

using ExprPtr = std::shared_ptr<Expr>;

bool grad_enabled();

// Disables graph construction (values still flow) for inference paths.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

ExprPtr constant(Mat v);
ExprPtr parameter(Mat v);
ExprPtr scalar(double v);

ExprPtr add(const ExprPtr& a, const ExprPtr& b);
ExprPtr sub(const ExprPtr& a, const ExprPtr& b);
ExprPtr mul(const ExprPtr& a, const ExprPtr& b);  // elementwise
ExprPtr scale(const ExprPtr& a, double s);
ExprPtr matmul(const ExprPtr& a, const ExprPtr& b);
ExprPtr transpose(const ExprPtr& a);
ExprPtr gather_rows(const ExprPtr& a, std::vector<int> indices);
ExprPtr slice_cols(const ExprPtr& a, int offset, int count);
ExprPtr concat_cols(const std::vector<ExprPtr>& parts);
ExprPtr add_row_broadcast(const ExprPtr& a, const ExprPtr& row);  // row: 1 x d
ExprPtr relu(const ExprPtr& a);
ExprPtr gelu(const ExprPtr& a);
ExprPtr softmax_rows(const ExprPtr& a);
ExprPtr layer_norm(const ExprPtr& x, const ExprPtr& gamma, const ExprPtr& beta, double eps);
ExprPtr log_softmax_row(const ExprPtr& a);        // 1 x k
ExprPtr pick(const ExprPtr& a, int r, int c);     // -> 1 x 1
ExprPtr dot(const ExprPtr& a, const ExprPtr& b);  // same-shape -> 1 x 1
ExprPtr frobenius_norm(const ExprPtr& a);         // -> 1 x 1
ExprPtr divide(const ExprPtr& a, const ExprPtr& b);  // 1x1 / 1x1
ExprPtr softplus(const ExprPtr& a);               // elementwise log(1 + e^x)

void backward(const ExprPtr& root);

}  // namespace cott::ag
