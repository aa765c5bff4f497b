// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/reasoner.hpp"

#include <cmath>

#include "cott/error.hpp"
#include "cott/rng.hpp"

namespace cott {

namespace {

// Walks the joint product space in lexicographic order (slot 0 outermost).
// visit(tuple, joint probability) -> false stops early.
template <typename Visit>
void for_each_joint_tuple(const std::vector<SlotDistribution>& dists, Visit visit) {
    std::vector<int> idx(dists.size(), 0);
    while (true) {
        double p = 1.0;
        std::vector<std::string> tuple(dists.size());
        for (std::size_t s = 0; s < dists.size(); ++s) {
            tuple[s] = dists[s].symbols[idx[s]];
            p *= dists[s].probs(idx[s]);
        }
        if (!visit(tuple, p)) return;
        int s = static_cast<int>(dists.size()) - 1;
        while (s >= 0) {
            if (++idx[s] < static_cast<int>(dists[s].symbols.size())) break;
            idx[s] = 0;
            --s;
        }
        if (s < 0) return;
    }
}

long long joint_space_size(const std::vector<SlotDistribution>& dists) {
    long long n = 1;
    for (const auto& d : dists) {
        n *= static_cast<long long>(d.symbols.size());
        if (n > (1LL << 40)) return n;  // avoid overflow on absurd inputs
    }
    return n;
}

double joint_probability_of(const std::vector<SlotDistribution>& dists,
                            const std::vector<std::string>& tuple) {
    double p = 1.0;
    for (std::size_t s = 0; s < dists.size(); ++s) p *= dists[s].prob_of(tuple[s]);
    return p;
}

void check_enumerable(const std::vector<SlotDistribution>& dists) {
    long long n = joint_space_size(dists);
    if (n > kMaxJointSpace)
        raise(ErrorCode::SpaceTooLarge,
              "joint intermediate space has " + std::to_string(n) + " tuples, limit is " +
                  std::to_string(kMaxJointSpace));
}

}  // namespace

StepOneResult step_one(const Backend& backend, const PromptSpec& spec, const RenderInput& input) {
    PromptInstance prompt = render_step1(spec.tmpl, input);
    EncodeResult enc = backend.encode(prompt);

    StepOneResult out;
    out.answer_hidden = enc.answer_hidden;
    out.step_conf = 1.0;
    for (std::size_t s = 0; s < spec.step_verbalizers.size(); ++s) {
        SlotDistribution dist =
            backend.score_slot(enc.convertible_hidden[s], spec.step_verbalizers[s]);
        int best = dist.argmax();
        out.step_pred.push_back(dist.symbols[best]);
        out.step_conf *= dist.probs(best);
        out.step_dists.push_back(std::move(dist));
    }
    out.label_dist = backend.score_slot(enc.answer_hidden, spec.label_verbalizer);
    out.label_pred = out.label_dist.symbols[out.label_dist.argmax()];
    return out;
}

StepTwoResult step_two(const Backend& backend, const PromptSpec& spec, const RenderInput& input,
                       const std::vector<std::string>& step) {
    PromptInstance prompt = render_step2(spec.tmpl, input, step, spec.step_verbalizers);
    EncodeResult enc = backend.encode(prompt);

    StepTwoResult out;
    out.answer_hidden = enc.answer_hidden;
    out.label_dist = backend.score_slot(enc.answer_hidden, spec.label_verbalizer);
    out.label_pred = out.label_dist.symbols[out.label_dist.argmax()];
    return out;
}

double counterfactual_probability(const std::vector<SlotDistribution>& step_dists,
                                  const std::vector<std::string>& step_pred,
                                  const std::vector<std::string>& tuple) {
    if (tuple == step_pred) return 0.0;
    double p_pred = joint_probability_of(step_dists, step_pred);
    double rest = 1.0 - p_pred;
    if (rest <= 0.0) return 0.0;
    return joint_probability_of(step_dists, tuple) / rest;
}

std::vector<std::string> sample_counterfactual(const std::vector<SlotDistribution>& step_dists,
                                               const std::vector<std::string>& step_pred,
                                               std::mt19937_64& rng) {
    if (step_dists.size() != step_pred.size())
        raise(ErrorCode::ArityMismatch, "predicted tuple arity does not match slot count");
    long long space = joint_space_size(step_dists);
    if (space < 2)
        raise(ErrorCode::NoCounterfactualAvailable, "joint intermediate space has one tuple");

    double p_pred = joint_probability_of(step_dists, step_pred);
    double rest = 1.0 - p_pred;
    if (rest < kProbFloor)
        raise(ErrorCode::NoCounterfactualAvailable,
              "all probability mass sits on the predicted tuple");

    double u = uniform_double(rng) * rest;
    double cum = 0.0;
    std::vector<std::string> drawn;
    bool found = false;
    for_each_joint_tuple(step_dists, [&](const std::vector<std::string>& tuple, double p) {
        if (tuple == step_pred) return true;
        cum += p;
        drawn = tuple;  // keep the last non-predicted tuple as rounding fallback
        if (cum > u) {
            found = true;
            return false;
        }
        return true;
    });
    (void)found;
    return drawn;
}

SlotDistribution rectify(double conf, const SlotDistribution& p_step1,
                         const SlotDistribution& p_step2) {
    if (conf < 0.0 || conf > 1.0)
        raise(ErrorCode::PreconditionViolation, "confidence must lie in [0, 1]");
    if (p_step1.symbols != p_step2.symbols || p_step1.probs.size() != p_step2.probs.size())
        raise(ErrorCode::CandidateMismatch, "distributions cover different candidate lists");
    SlotDistribution out;
    out.symbols = p_step1.symbols;
    out.probs = conf * p_step2.probs + (1.0 - conf) * p_step1.probs;
    return out;
}

ReasoningTrace predict(const Backend& backend, const PromptSpec& spec, const RenderInput& input,
                       const std::string& id) {
    StepOneResult one = step_one(backend, spec, input);
    StepTwoResult two = step_two(backend, spec, input, one.step_pred);
    SlotDistribution rect = rectify(one.step_conf, one.label_dist, two.label_dist);

    ReasoningTrace trace;
    trace.id = id;
    trace.step_dists = std::move(one.step_dists);
    trace.step_pred = std::move(one.step_pred);
    trace.step_conf = one.step_conf;
    trace.label_step1 = std::move(one.label_dist);
    trace.label_pred_step1 = std::move(one.label_pred);
    trace.label_step2 = std::move(two.label_dist);
    trace.label_pred_step2 = std::move(two.label_pred);
    trace.label_pred = rect.symbols[rect.argmax()];
    trace.label_rectified = std::move(rect);
    trace.hidden_step1 = std::move(one.answer_hidden);
    trace.hidden_step2 = std::move(two.answer_hidden);
    return trace;
}

SlotDistribution exact_total_probability(const Backend& backend, const PromptSpec& spec,
                                         const RenderInput& input) {
    StepOneResult one = step_one(backend, spec, input);
    check_enumerable(one.step_dists);

    SlotDistribution out;
    out.symbols = spec.label_verbalizer.symbols();
    out.probs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out.symbols.size()));
    for_each_joint_tuple(one.step_dists, [&](const std::vector<std::string>& tuple, double p) {
        StepTwoResult two = step_two(backend, spec, input, tuple);
        out.probs += p * two.label_dist.probs;
        return true;
    });
    return out;
}

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() != q.size()) raise(ErrorCode::LengthMismatch, "KL over different supports");
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        double pi = std::max(p(i), kProbFloor);
        double qi = std::max(q(i), kProbFloor);
        kl += pi * std::log(pi / qi);
    }
    return kl;
}

KlAssumptionReport kl_assumption_check(const Backend& backend, const PromptSpec& spec,
                                       const RenderInput& input) {
    StepOneResult one = step_one(backend, spec, input);
    check_enumerable(one.step_dists);
    StepTwoResult predicted = step_two(backend, spec, input, one.step_pred);

    KlAssumptionReport report;
    int holds = 0;
    for_each_joint_tuple(one.step_dists, [&](const std::vector<std::string>& tuple, double) {
        if (tuple == one.step_pred) return true;
        StepTwoResult two = step_two(backend, spec, input, tuple);
        KlAssumptionEntry entry;
        entry.step = tuple;
        entry.kl_vs_step1 = kl_divergence(two.label_dist.probs, one.label_dist.probs);
        entry.kl_vs_predicted = kl_divergence(two.label_dist.probs, predicted.label_dist.probs);
        entry.holds = entry.kl_vs_step1 < entry.kl_vs_predicted;
        holds += entry.holds ? 1 : 0;
        report.entries.push_back(std::move(entry));
        return true;
    });
    report.satisfaction_rate =
        report.entries.empty() ? 0.0 : static_cast<double>(holds) / report.entries.size();
    return report;
}

}  // namespace cott
