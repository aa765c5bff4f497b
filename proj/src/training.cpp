// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/training.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cott/error.hpp"
#include "cott/metrics.hpp"
#include "cott/rng.hpp"

namespace cott {

using nlohmann::json;

std::string to_string(TrainConfig::Variant variant) {
    switch (variant) {
        case TrainConfig::Variant::Cott: return "cott";
        case TrainConfig::Variant::NoCcl: return "no_ccl";
        case TrainConfig::Variant::Vanilla: return "vanilla";
    }
    return "cott";
}

std::string to_string(TrainConfig::Selection selection) {
    return selection == TrainConfig::Selection::Train ? "train" : "dev";
}

void TrainConfig::validate() const {
    if (alpha < 0.0 || beta < 0.0) raise(ErrorCode::InvalidConfig, "alpha and beta must be >= 0");
    if (tau <= 0.0) raise(ErrorCode::NonPositiveTemperature, std::to_string(tau));
    if (learning_rate <= 0.0) raise(ErrorCode::InvalidConfig, "learning_rate must be > 0");
    if (lr_decay_factor <= 0.0 || lr_decay_period < 1)
        raise(ErrorCode::InvalidConfig, "bad learning-rate decay schedule");
    if (weight_decay < 0.0) raise(ErrorCode::InvalidConfig, "weight_decay must be >= 0");
    if (batch_size < 1) raise(ErrorCode::InvalidConfig, "batch_size must be >= 1");
    if (epochs < 1) raise(ErrorCode::InvalidConfig, "epochs must be >= 1");
}

double TrainConfig::lr_at_epoch(int epoch) const {
    return learning_rate * std::pow(lr_decay_factor, epoch / lr_decay_period);
}

TrainConfig TrainConfig::parse(std::istream& in, const std::string& origin) {
    TrainConfig config;
    bool seed_seen = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream row(line);
        std::string key, eq, value;
        if (!(row >> key)) continue;
        if (!(row >> eq >> value) || eq != "=")
            raise(ErrorCode::InvalidConfig,
                  origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        try {
            if (key == "alpha") config.alpha = std::stod(value);
            else if (key == "beta") config.beta = std::stod(value);
            else if (key == "tau") config.tau = std::stod(value);
            else if (key == "learning_rate") config.learning_rate = std::stod(value);
            else if (key == "lr_decay_factor") config.lr_decay_factor = std::stod(value);
            else if (key == "lr_decay_period") config.lr_decay_period = std::stoi(value);
            else if (key == "weight_decay") config.weight_decay = std::stod(value);
            else if (key == "batch_size") config.batch_size = std::stoi(value);
            else if (key == "epochs") config.epochs = std::stoi(value);
            else if (key == "seed") { config.seed = std::stoull(value); seed_seen = true; }
            else if (key == "selection_split") {
                if (value == "train") config.selection = Selection::Train;
                else if (value == "dev") config.selection = Selection::Dev;
                else raise(ErrorCode::InvalidConfig, origin + ": selection_split must be train|dev");
            } else if (key == "variant") {
                if (value == "cott") config.variant = Variant::Cott;
                else if (value == "no_ccl") config.variant = Variant::NoCcl;
                else if (value == "vanilla") config.variant = Variant::Vanilla;
                else raise(ErrorCode::InvalidConfig,
                           origin + ": variant must be cott|no_ccl|vanilla");
            } else if (key == "condition_on_gold") {
                if (value == "true") config.condition_on_gold = true;
                else if (value == "false") config.condition_on_gold = false;
                else raise(ErrorCode::InvalidConfig, origin + ": condition_on_gold must be true|false");
            } else {
                raise(ErrorCode::InvalidConfig,
                      origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            raise(ErrorCode::InvalidConfig,
                  origin + ":" + std::to_string(line_no) + ": bad value for '" + key + "'");
        } catch (const std::out_of_range&) {
            raise(ErrorCode::InvalidConfig,
                  origin + ":" + std::to_string(line_no) + ": value out of range for '" + key + "'");
        }
    }
    if (!seed_seen) raise(ErrorCode::InvalidConfig, origin + ": 'seed' is required");
    config.validate();
    return config;
}

TrainConfig TrainConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::InvalidConfig, "cannot open config " + path);
    return parse(in, path);
}

json TrainConfig::to_json() const {
    return json{{"alpha", alpha},
                {"beta", beta},
                {"tau", tau},
                {"learning_rate", learning_rate},
                {"lr_decay_factor", lr_decay_factor},
                {"lr_decay_period", lr_decay_period},
                {"weight_decay", weight_decay},
                {"batch_size", batch_size},
                {"epochs", epochs},
                {"seed", seed},
                {"selection_split", cott::to_string(selection)},
                {"variant", cott::to_string(variant)},
                {"condition_on_gold", condition_on_gold}};
}

AdamOptimizer::AdamOptimizer(std::vector<ag::ExprPtr> params, double beta1, double beta2,
                             double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
        m_.push_back(ag::Mat::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(ag::Mat::Zero(p->value.rows(), p->value.cols()));
    }
}

void AdamOptimizer::step(double lr, double weight_decay) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = *params_[i];
        if (p.grad.size() == 0) {
            if (weight_decay > 0.0) p.value -= lr * weight_decay * p.value;
            continue;
        }
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
        ag::Mat mhat = m_[i] / bc1;
        ag::Mat vhat = v_[i] / bc2;
        p.value -= lr * (mhat.array() / (vhat.array().sqrt() + eps_)).matrix();
        if (weight_decay > 0.0) p.value -= lr * weight_decay * p.value;
    }
}

void AdamOptimizer::zero_grad() {
    for (auto& p : params_) p->zero_grad();
}

namespace {

int symbol_index(const Verbalizer& verbalizer, const std::string& symbol) {
    const auto& symbols = verbalizer.symbols();
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (symbols[i] == symbol) return static_cast<int>(i);
    raise(ErrorCode::UnknownSymbol, symbol);
}

// -log softmax(logits)[gold]
ag::ExprPtr nll(const ag::ExprPtr& logits, int gold) {
    return ag::scale(ag::pick(ag::log_softmax_row(logits), 0, gold), -1.0);
}

}  // namespace

ag::ExprPtr instance_loss(const ReferenceBackbone& backbone, const ProjectionHead& head,
                          const PromptSpec& spec, const Instance& instance,
                          const TrainConfig& config, std::mt19937_64& rng,
                          LossDiagnostics* diagnostics) {
    if (instance.step.size() != spec.step_verbalizers.size())
        raise(ErrorCode::ArityMismatch, instance.id + ": gold step arity mismatch");
    LossDiagnostics local;
    LossDiagnostics& diag = diagnostics ? *diagnostics : local;
    diag = LossDiagnostics{};

    const RenderInput input = instance.render_input();
    auto graph1 = backbone.encode_graph(render_step1(spec.tmpl, input));
    const int gold_label = symbol_index(spec.label_verbalizer, instance.label);
    auto label1_logits = backbone.entry_logits(graph1.answer, spec.label_verbalizer.entries());
    auto label1_ce = nll(label1_logits, gold_label);
    diag.label_step1_ce = label1_ce->value(0, 0);

    if (config.variant == TrainConfig::Variant::Vanilla) {
        diag.total = diag.label_step1_ce;
        return label1_ce;
    }

    // step-I slot heads: cross entropy against the gold tuple plus the value
    // distributions used for the argmax prediction and counterfactual draw
    ag::ExprPtr step_ce;
    std::vector<SlotDistribution> step_dists;
    for (std::size_t s = 0; s < spec.step_verbalizers.size(); ++s) {
        const auto& verbalizer = spec.step_verbalizers[s];
        auto logits = backbone.entry_logits(graph1.convertibles[s], verbalizer.entries());
        auto ce = nll(logits, symbol_index(verbalizer, instance.step[s]));
        step_ce = step_ce ? ag::add(step_ce, ce) : ce;
        SlotDistribution dist;
        dist.symbols = verbalizer.symbols();
        dist.probs = stable_softmax(logits->value.row(0).transpose());
        step_dists.push_back(std::move(dist));
    }
    diag.step_ce = step_ce->value(0, 0);

    for (const auto& dist : step_dists) diag.step_pred.push_back(dist.symbols[dist.argmax()]);
    const auto& conditioning = config.condition_on_gold ? instance.step : diag.step_pred;

    auto graph2 = backbone.encode_graph(
        render_step2(spec.tmpl, input, conditioning, spec.step_verbalizers));
    auto label2_logits = backbone.entry_logits(graph2.answer, spec.label_verbalizer.entries());
    auto label2_ce = nll(label2_logits, gold_label);
    diag.label_step2_ce = label2_ce->value(0, 0);

    auto total = ag::add(ag::add(ag::scale(step_ce, config.alpha), label1_ce), label2_ce);

    const bool contrastive_active =
        config.beta > 0.0 && config.variant == TrainConfig::Variant::Cott;
    if (contrastive_active) {
        try {
            diag.counterfactual_step = sample_counterfactual(step_dists, diag.step_pred, rng);
            auto graph3 = backbone.encode_graph(
                render_step2(spec.tmpl, input, diag.counterfactual_step, spec.step_verbalizers));
            auto z_anchor = head.project_graph(graph1.answer);
            auto z_pos = head.project_graph(graph2.answer);
            auto z_neg = head.project_graph(graph3.answer);
            auto contrastive = contrastive_loss_graph(z_anchor, z_pos, z_neg, config.tau);
            diag.contrastive = contrastive->value(0, 0);
            diag.counterfactual_drawn = true;
            total = ag::add(total, ag::scale(contrastive, config.beta));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoCounterfactualAvailable) throw;
            diag.counterfactual_skipped = true;
        }
    }
    diag.total = total->value(0, 0);
    return total;
}

double evaluate_micro_f1(const Backend& backend, const TaskSpec& task, const Dataset& dataset,
                         TrainConfig::Variant variant) {
    if (dataset.empty()) raise(ErrorCode::EmptyDataset, "evaluation split is empty");
    PromptSpec spec = task.prompt_spec();
    std::vector<std::string> preds, golds;
    preds.reserve(dataset.size());
    for (const auto& instance : dataset.instances) {
        if (variant == TrainConfig::Variant::Vanilla) {
            preds.push_back(step_one(backend, spec, instance.render_input()).label_pred);
        } else {
            preds.push_back(predict(backend, spec, instance.render_input()).label_pred);
        }
        golds.push_back(instance.label);
    }
    return micro_macro_f1(preds, golds, task.label_symbols).micro;
}

TrainResult train(ReferenceBackbone& backbone, ProjectionHead& head, const TaskSpec& task,
                  const Dataset& train_split, const Dataset* dev_split,
                  const TrainConfig& config, std::ostream* step_log) {
    config.validate();
    if (train_split.empty()) raise(ErrorCode::EmptyDataset, "training split is empty");

    const Dataset* selection_split = &train_split;
    std::string selection_name = "train";
    if (config.selection == TrainConfig::Selection::Dev && dev_split != nullptr &&
        !dev_split->empty()) {
        selection_split = dev_split;
        selection_name = "dev";
    }

    PromptSpec spec = task.prompt_spec();
    std::vector<ag::ExprPtr> params = backbone.parameters();
    const bool train_head =
        config.beta > 0.0 && config.variant == TrainConfig::Variant::Cott;
    if (train_head)
        for (auto& [name, p] : head.named_parameters()) params.push_back(p);
    AdamOptimizer optimizer(params);

    std::mt19937_64 order_rng(mix_seed(config.seed, 0x6f726465));
    std::mt19937_64 cf_rng(mix_seed(config.seed, 0x636f756e));

    TrainResult result;
    result.selection_split = selection_name;
    std::vector<ag::Mat> best_params;
    long global_step = 0;

    std::vector<std::size_t> order(train_split.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = config.lr_at_epoch(epoch);
        shuffle_in_place(order, order_rng);

        double epoch_loss = 0.0;
        long epoch_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            optimizer.zero_grad();
            ag::ExprPtr batch_loss;
            double ce_step = 0.0, ce1 = 0.0, ce2 = 0.0, ccl = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                LossDiagnostics diag;
                auto loss = instance_loss(backbone, head, spec,
                                          train_split.instances[order[k]], config, cf_rng, &diag);
                batch_loss = batch_loss ? ag::add(batch_loss, loss) : loss;
                ce_step += diag.step_ce;
                ce1 += diag.label_step1_ce;
                ce2 += diag.label_step2_ce;
                ccl += diag.contrastive;
                result.counterfactual_draws += diag.counterfactual_drawn ? 1 : 0;
                result.counterfactual_skips += diag.counterfactual_skipped ? 1 : 0;
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            batch_loss = ag::scale(batch_loss, inv);
            ag::backward(batch_loss);
            optimizer.step(lr, config.weight_decay);

            epoch_loss += batch_loss->value(0, 0);
            ++epoch_batches;
            ++global_step;
            if (step_log) {
                json row{{"step", global_step},
                         {"epoch", epoch},
                         {"lr", lr},
                         {"loss", batch_loss->value(0, 0)},
                         {"step_ce", ce_step * inv},
                         {"label_step1_ce", ce1 * inv},
                         {"label_step2_ce", ce2 * inv},
                         {"contrastive", ccl * inv}};
                (*step_log) << row.dump() << '\n';
            }
        }

        EpochRecord record;
        record.epoch = epoch;
        record.lr = lr;
        record.mean_loss = epoch_loss / static_cast<double>(epoch_batches);
        record.selection_metric =
            evaluate_micro_f1(backbone, task, *selection_split, config.variant);
        result.epochs.push_back(record);

        if (result.best_epoch < 0 || record.selection_metric > result.best_metric) {
            result.best_epoch = epoch;
            result.best_metric = record.selection_metric;
            best_params.clear();
            for (const auto& p : params) best_params.push_back(p->value);
        }
    }

    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_params[i];
    return result;
}

}  // namespace cott
