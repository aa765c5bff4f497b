// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cott/backend.hpp"
#include "cott/prompt.hpp"

namespace cott {

// Probabilities below this are floored before logs and KL terms.
constexpr double kProbFloor = 1e-12;

// Largest joint intermediate space the enumeration paths will walk.
constexpr int kMaxJointSpace = 1000;

struct StepOneResult {
    std::vector<SlotDistribution> step_dists;  // one per [C] slot
    std::vector<std::string> step_pred;        // argmax tuple
    double step_conf = 0.0;                    // joint product probability of step_pred
    SlotDistribution label_dist;               // parallel label head
    std::string label_pred;
    Eigen::VectorXd answer_hidden;
};

struct StepTwoResult {
    SlotDistribution label_dist;
    std::string label_pred;
    Eigen::VectorXd answer_hidden;
};

// Per-instance record of the full two-step reasoning process.
struct ReasoningTrace {
    std::string id;
    std::vector<SlotDistribution> step_dists;
    std::vector<std::string> step_pred;  // I-hat
    double step_conf = 0.0;
    SlotDistribution label_step1;  // p(y|x)
    std::string label_pred_step1;  // intuitive prediction
    SlotDistribution label_step2;  // p(y|x, I-hat)
    std::string label_pred_step2;  // rational prediction
    SlotDistribution label_rectified;
    std::string label_pred;  // final, argmax of the rectified distribution
    Eigen::VectorXd hidden_step1;
    Eigen::VectorXd hidden_step2;
    std::optional<Eigen::VectorXd> hidden_counterfactual;
    std::optional<std::vector<std::string>> counterfactual_step;
};

StepOneResult step_one(const Backend& backend, const PromptSpec& spec, const RenderInput& input);

StepTwoResult step_two(const Backend& backend, const PromptSpec& spec, const RenderInput& input,
                       const std::vector<std::string>& step);

// Draws a tuple from the joint product distribution with the predicted tuple
// masked out and the remainder renormalized. Never returns `step_pred`.
std::vector<std::string> sample_counterfactual(const std::vector<SlotDistribution>& step_dists,
                                               const std::vector<std::string>& step_pred,
                                               std::mt19937_64& rng);

// Probability that the masked-and-renormalized counterfactual distribution
// assigns to `tuple`; exact reference for the sampler.
double counterfactual_probability(const std::vector<SlotDistribution>& step_dists,
                                  const std::vector<std::string>& step_pred,
                                  const std::vector<std::string>& tuple);

// conf * pStep2 + (1 - conf) * pStep1, the adaptive weighting of the two
// label heads by the intermediate-step confidence.
SlotDistribution rectify(double conf, const SlotDistribution& p_step1,
                         const SlotDistribution& p_step2);

ReasoningTrace predict(const Backend& backend, const PromptSpec& spec, const RenderInput& input,
                       const std::string& id = "");

// Exact label probability: sum over every intermediate tuple of
// p(I|x) * p(y|x,I). Oracle for the rectified approximation.
SlotDistribution exact_total_probability(const Backend& backend, const PromptSpec& spec,
                                         const RenderInput& input);

struct KlAssumptionEntry {
    std::vector<std::string> step;  // I != I-hat
    double kl_vs_step1;             // D_KL(p(y|x,I) || p(y|x))
    double kl_vs_predicted;         // D_KL(p(y|x,I) || p(y|x,I-hat))
    bool holds;                     // kl_vs_step1 < kl_vs_predicted
};

struct KlAssumptionReport {
    std::vector<KlAssumptionEntry> entries;
    double satisfaction_rate = 0.0;
};

KlAssumptionReport kl_assumption_check(const Backend& backend, const PromptSpec& spec,
                                       const RenderInput& input);

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

}  // namespace cott
