// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cott/contrastive.hpp"
#include "cott/data.hpp"
#include "cott/encoder.hpp"
#include "cott/reasoner.hpp"

namespace cott {

struct TrainConfig {
    double alpha = 0.1;  // weight of the intermediate-step cross entropy
    double beta = 0.1;   // weight of the contrastive term
    double tau = 1.0;    // contrastive temperature
    double learning_rate = 1e-5;
    double lr_decay_factor = 0.5;
    int lr_decay_period = 2;  // epochs
    double weight_decay = 1e-2;
    int batch_size = 8;
    int epochs = 10;
    std::uint64_t seed = 0;

    enum class Selection { Train, Dev };
    Selection selection = Selection::Dev;

    // cott: full loss; no_ccl: contrastive term removed; vanilla: plain
    // prompt tuning, step-I label head only.
    enum class Variant { Cott, NoCcl, Vanilla };
    Variant variant = Variant::Cott;

    // ablation: condition step II on the gold step instead of the prediction
    bool condition_on_gold = false;

    void validate() const;
    double lr_at_epoch(int epoch) const;  // epoch is 0-based

    // Flat "key = value" document; unknown keys are errors, seed is required.
    static TrainConfig parse(std::istream& in, const std::string& origin);
    static TrainConfig parse_file(const std::string& path);
    nlohmann::json to_json() const;
};

std::string to_string(TrainConfig::Variant variant);
std::string to_string(TrainConfig::Selection selection);

// Bias-corrected adaptive moment optimizer with decoupled weight decay.
class AdamOptimizer {
public:
    explicit AdamOptimizer(std::vector<ag::ExprPtr> params, double beta1 = 0.9,
                           double beta2 = 0.999, double eps = 1e-8);

    void step(double lr, double weight_decay);
    void zero_grad();

private:
    std::vector<ag::ExprPtr> params_;
    std::vector<ag::Mat> m_, v_;
    double beta1_, beta2_, eps_;
    long t_ = 0;
};

struct LossDiagnostics {
    double total = 0.0;
    double step_ce = 0.0;         // -log p(I_gold | x), summed over slots
    double label_step1_ce = 0.0;  // -log p(y_gold | x)
    double label_step2_ce = 0.0;  // -log p(y_gold | x, I-hat)
    double contrastive = 0.0;
    bool counterfactual_drawn = false;
    bool counterfactual_skipped = false;  // degenerate intermediate space
    std::vector<std::string> step_pred;
    std::vector<std::string> counterfactual_step;
};

// Builds the full per-instance loss graph:
//   alpha * step CE + step-I label CE + step-II label CE + beta * L_c.
// The step-II prompt conditions on the argmax step prediction (a
// non-differentiable selection); the counterfactual negative is drawn fresh
// from `rng` on every call.
ag::ExprPtr instance_loss(const ReferenceBackbone& backbone, const ProjectionHead& head,
                          const PromptSpec& spec, const Instance& instance,
                          const TrainConfig& config, std::mt19937_64& rng,
                          LossDiagnostics* diagnostics = nullptr);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;
    double selection_metric = 0.0;
};

struct TrainResult {
    int best_epoch = -1;
    double best_metric = 0.0;
    std::string selection_split;
    std::vector<EpochRecord> epochs;
    long counterfactual_draws = 0;
    long counterfactual_skips = 0;
};

// Mini-batch training on the mean instance loss with the configured schedule;
// keeps the best checkpoint measured on the selection split and leaves the
// model at those weights. Fully deterministic given the seed.
TrainResult train(ReferenceBackbone& backbone, ProjectionHead& head, const TaskSpec& task,
                  const Dataset& train_split, const Dataset* dev_split,
                  const TrainConfig& config, std::ostream* step_log = nullptr);

// Micro F1 of the variant's prediction path over a dataset (the rectified
// prediction, or the step-I parallel head for the vanilla variant).
double evaluate_micro_f1(const Backend& backend, const TaskSpec& task, const Dataset& dataset,
                         TrainConfig::Variant variant);

}  // namespace cott
