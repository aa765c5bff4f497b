// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/autograd.hpp"

#include <cmath>
#include <unordered_set>
#include <utility>

#include "cott/error.hpp"

namespace cott::ag {

namespace {

thread_local bool g_grad_enabled = true;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Registers `out` as a function of `ins` when gradients are wanted;
// otherwise returns a detached value node.
ExprPtr make_node(Mat value, std::vector<ExprPtr> ins, std::function<void(Expr&)> back) {
    bool rg = false;
    if (g_grad_enabled) {
        for (const auto& in : ins)
            if (in->requires_grad) { rg = true; break; }
    }
    auto out = std::make_shared<Expr>(std::move(value), rg);
    if (rg) {
        out->inputs = std::move(ins);
        out->backward_fn = std::move(back);
    }
    return out;
}

void check_same_shape(const ExprPtr& a, const ExprPtr& b, const char* op) {
    if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
        raise(ErrorCode::DimensionMismatch, std::string(op) + ": operand shapes differ");
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

ExprPtr constant(Mat v) { return std::make_shared<Expr>(std::move(v), false); }

ExprPtr parameter(Mat v) { return std::make_shared<Expr>(std::move(v), true); }

ExprPtr scalar(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return constant(std::move(m));
}

ExprPtr add(const ExprPtr& a, const ExprPtr& b) {
    check_same_shape(a, b, "add");
    return make_node(a->value + b->value, {a, b}, [](Expr& out) {
        out.inputs[0]->accumulate(out.grad);
        out.inputs[1]->accumulate(out.grad);
    });
}

ExprPtr sub(const ExprPtr& a, const ExprPtr& b) {
    check_same_shape(a, b, "sub");
    return make_node(a->value - b->value, {a, b}, [](Expr& out) {
        out.inputs[0]->accumulate(out.grad);
        out.inputs[1]->accumulate(-out.grad);
    });
}

ExprPtr mul(const ExprPtr& a, const ExprPtr& b) {
    check_same_shape(a, b, "mul");
    return make_node(a->value.cwiseProduct(b->value), {a, b}, [](Expr& out) {
        out.inputs[0]->accumulate(out.grad.cwiseProduct(out.inputs[1]->value));
        out.inputs[1]->accumulate(out.grad.cwiseProduct(out.inputs[0]->value));
    });
}

ExprPtr scale(const ExprPtr& a, double s) {
    return make_node(a->value * s, {a}, [s](Expr& out) {
        out.inputs[0]->accumulate(out.grad * s);
    });
}

ExprPtr matmul(const ExprPtr& a, const ExprPtr& b) {
    if (a->value.cols() != b->value.rows())
        raise(ErrorCode::DimensionMismatch, "matmul: inner dimensions differ");
    return make_node(a->value * b->value, {a, b}, [](Expr& out) {
        out.inputs[0]->accumulate(out.grad * out.inputs[1]->value.transpose());
        out.inputs[1]->accumulate(out.inputs[0]->value.transpose() * out.grad);
    });
}

ExprPtr transpose(const ExprPtr& a) {
    return make_node(a->value.transpose(), {a}, [](Expr& out) {
        out.inputs[0]->accumulate(out.grad.transpose());
    });
}

ExprPtr gather_rows(const ExprPtr& a, std::vector<int> indices) {
    Mat v(static_cast<Eigen::Index>(indices.size()), a->value.cols());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] < 0 || indices[k] >= a->value.rows())
            raise(ErrorCode::DimensionMismatch, "gather_rows: index out of range");
        v.row(static_cast<Eigen::Index>(k)) = a->value.row(indices[k]);
    }
    return make_node(std::move(v), {a}, [idx = std::move(indices)](Expr& out) {
        auto& src = *out.inputs[0];
        if (src.grad.size() == 0) src.grad = Mat::Zero(src.value.rows(), src.value.cols());
        for (std::size_t k = 0; k < idx.size(); ++k)
            src.grad.row(idx[k]) += out.grad.row(static_cast<Eigen::Index>(k));
    });
}

ExprPtr slice_cols(const ExprPtr& a, int offset, int count) {
    if (offset < 0 || count <= 0 || offset + count > a->value.cols())
        raise(ErrorCode::DimensionMismatch, "slice_cols: block out of range");
    return make_node(a->value.middleCols(offset, count), {a}, [offset, count](Expr& out) {
        auto& src = *out.inputs[0];
        if (src.grad.size() == 0) src.grad = Mat::Zero(src.value.rows(), src.value.cols());
        src.grad.middleCols(offset, count) += out.grad;
    });
}

ExprPtr concat_cols(const std::vector<ExprPtr>& parts) {
    if (parts.empty()) raise(ErrorCode::DimensionMismatch, "concat_cols: no parts");
    Eigen::Index rows = parts.front()->value.rows();
    Eigen::Index cols = 0;
    for (const auto& p : parts) {
        if (p->value.rows() != rows)
            raise(ErrorCode::DimensionMismatch, "concat_cols: row counts differ");
        cols += p->value.cols();
    }
    Mat v(rows, cols);
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        v.middleCols(off, p->value.cols()) = p->value;
        off += p->value.cols();
    }
    return make_node(std::move(v), parts, [](Expr& out) {
        Eigen::Index off2 = 0;
        for (auto& in : out.inputs) {
            in->accumulate(out.grad.middleCols(off2, in->value.cols()));
            off2 += in->value.cols();
        }
    });
}

ExprPtr add_row_broadcast(const ExprPtr& a, const ExprPtr& row) {
    if (row->value.rows() != 1 || row->value.cols() != a->value.cols())
        raise(ErrorCode::DimensionMismatch, "add_row_broadcast: row vector shape");
    Mat v = a->value;
    v.rowwise() += row->value.row(0);
    return make_node(std::move(v), {a, row}, [](Expr& out) {
        out.inputs[0]->accumulate(out.grad);
        out.inputs[1]->accumulate(out.grad.colwise().sum());
    });
}

ExprPtr relu(const ExprPtr& a) {
    return make_node(a->value.cwiseMax(0.0), {a}, [](Expr& out) {
        Mat mask = (out.inputs[0]->value.array() > 0.0).cast<double>();
        out.inputs[0]->accumulate(out.grad.cwiseProduct(mask));
    });
}

ExprPtr gelu(const ExprPtr& a) {
    Mat v = a->value.unaryExpr([](double x) {
        return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
    });
    return make_node(std::move(v), {a}, [](Expr& out) {
        Mat d = out.inputs[0]->value.unaryExpr([](double x) {
            double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            return cdf + x * pdf;
        });
        out.inputs[0]->accumulate(out.grad.cwiseProduct(d));
    });
}

ExprPtr softmax_rows(const ExprPtr& a) {
    Mat v = a->value;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        double m = v.row(r).maxCoeff();
        v.row(r) = (v.row(r).array() - m).exp();
        v.row(r) /= v.row(r).sum();
    }
    auto out = make_node(std::move(v), {a}, nullptr);
    if (out->requires_grad) {
        out->backward_fn = [](Expr& o) {
            Mat dx(o.value.rows(), o.value.cols());
            for (Eigen::Index r = 0; r < o.value.rows(); ++r) {
                double s = o.grad.row(r).dot(o.value.row(r));
                dx.row(r) = o.value.row(r).cwiseProduct((o.grad.row(r).array() - s).matrix());
            }
            o.inputs[0]->accumulate(dx);
        };
    }
    return out;
}

ExprPtr layer_norm(const ExprPtr& x, const ExprPtr& gamma, const ExprPtr& beta, double eps) {
    const Eigen::Index d = x->value.cols();
    if (gamma->value.rows() != 1 || gamma->value.cols() != d || beta->value.rows() != 1 ||
        beta->value.cols() != d)
        raise(ErrorCode::DimensionMismatch, "layer_norm: scale/shift shape");
    Mat xhat(x->value.rows(), d);
    Eigen::VectorXd inv_sigma(x->value.rows());
    for (Eigen::Index r = 0; r < x->value.rows(); ++r) {
        double mean = x->value.row(r).mean();
        double var = (x->value.row(r).array() - mean).square().mean();
        inv_sigma(r) = 1.0 / std::sqrt(var + eps);
        xhat.row(r) = (x->value.row(r).array() - mean) * inv_sigma(r);
    }
    Mat v = xhat;
    for (Eigen::Index r = 0; r < v.rows(); ++r)
        v.row(r) = v.row(r).cwiseProduct(gamma->value.row(0)) + beta->value.row(0);
    auto out = make_node(std::move(v), {x, gamma, beta}, nullptr);
    if (out->requires_grad) {
        out->backward_fn = [xhat = std::move(xhat), inv_sigma = std::move(inv_sigma)](Expr& o) {
            const auto& g = o.grad;
            auto& xin = *o.inputs[0];
            auto& ga = *o.inputs[1];
            auto& be = *o.inputs[2];
            const Eigen::Index dd = g.cols();
            Mat dgamma = Mat::Zero(1, dd);
            Mat dbeta = Mat::Zero(1, dd);
            Mat dx(g.rows(), dd);
            for (Eigen::Index r = 0; r < g.rows(); ++r) {
                Eigen::RowVectorXd gy = g.row(r).cwiseProduct(ga.value.row(0));
                double m1 = gy.mean();
                double m2 = gy.cwiseProduct(xhat.row(r)).mean();
                dx.row(r) = (gy.array() - m1 - xhat.row(r).array() * m2) * inv_sigma(r);
                dgamma.row(0) += g.row(r).cwiseProduct(xhat.row(r));
                dbeta.row(0) += g.row(r);
            }
            xin.accumulate(dx);
            ga.accumulate(dgamma);
            be.accumulate(dbeta);
        };
    }
    return out;
}

ExprPtr log_softmax_row(const ExprPtr& a) {
    if (a->value.rows() != 1)
        raise(ErrorCode::DimensionMismatch, "log_softmax_row: expected a row vector");
    double m = a->value.row(0).maxCoeff();
    double lse = m + std::log((a->value.row(0).array() - m).exp().sum());
    Mat v = a->value.array() - lse;
    return make_node(std::move(v), {a}, [](Expr& out) {
        Mat p = out.value.array().exp();
        double s = out.grad.sum();
        out.inputs[0]->accumulate(out.grad - s * p);
    });
}

ExprPtr pick(const ExprPtr& a, int r, int c) {
    if (r < 0 || r >= a->value.rows() || c < 0 || c >= a->value.cols())
        raise(ErrorCode::DimensionMismatch, "pick: index out of range");
    Mat v(1, 1);
    v(0, 0) = a->value(r, c);
    return make_node(std::move(v), {a}, [r, c](Expr& out) {
        auto& src = *out.inputs[0];
        if (src.grad.size() == 0) src.grad = Mat::Zero(src.value.rows(), src.value.cols());
        src.grad(r, c) += out.grad(0, 0);
    });
}

ExprPtr dot(const ExprPtr& a, const ExprPtr& b) {
    check_same_shape(a, b, "dot");
    Mat v(1, 1);
    v(0, 0) = a->value.cwiseProduct(b->value).sum();
    return make_node(std::move(v), {a, b}, [](Expr& out) {
        double g = out.grad(0, 0);
        out.inputs[0]->accumulate(g * out.inputs[1]->value);
        out.inputs[1]->accumulate(g * out.inputs[0]->value);
    });
}

ExprPtr frobenius_norm(const ExprPtr& a) {
    Mat v(1, 1);
    v(0, 0) = a->value.norm();
    return make_node(std::move(v), {a}, [](Expr& out) {
        double n = out.value(0, 0);
        if (n == 0.0) raise(ErrorCode::ZeroVector, "norm gradient undefined at zero");
        out.inputs[0]->accumulate((out.grad(0, 0) / n) * out.inputs[0]->value);
    });
}

ExprPtr divide(const ExprPtr& a, const ExprPtr& b) {
    if (a->value.size() != 1 || b->value.size() != 1)
        raise(ErrorCode::DimensionMismatch, "divide: expected scalars");
    Mat v(1, 1);
    v(0, 0) = a->value(0, 0) / b->value(0, 0);
    return make_node(std::move(v), {a, b}, [](Expr& out) {
        double g = out.grad(0, 0);
        double av = out.inputs[0]->value(0, 0);
        double bv = out.inputs[1]->value(0, 0);
        Mat ga(1, 1), gb(1, 1);
        ga(0, 0) = g / bv;
        gb(0, 0) = -g * av / (bv * bv);
        out.inputs[0]->accumulate(ga);
        out.inputs[1]->accumulate(gb);
    });
}

ExprPtr softplus(const ExprPtr& a) {
    Mat v = a->value.unaryExpr([](double x) {
        return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    });
    return make_node(std::move(v), {a}, [](Expr& out) {
        Mat d = out.inputs[0]->value.unaryExpr([](double x) {
            return 1.0 / (1.0 + std::exp(-x));
        });
        out.inputs[0]->accumulate(out.grad.cwiseProduct(d));
    });
}

void backward(const ExprPtr& root) {
    if (root->value.size() != 1)
        raise(ErrorCode::DimensionMismatch, "backward: root must be a scalar");
    if (!root->requires_grad) return;

    // iterative post-order over the grad-requiring subgraph
    std::vector<Expr*> order;
    std::unordered_set<Expr*> visited;
    std::vector<std::pair<Expr*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            Expr* child = node->inputs[next++].get();
            if (child->requires_grad && !visited.count(child)) {
                visited.insert(child);
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->accumulate(Mat::Ones(1, 1));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Expr* node = *it;
        if (node->backward_fn && node->grad.size() != 0) node->backward_fn(*node);
    }
}

}  // namespace cott::ag
