// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: train, eval, predict, monitor, rectify, synth.
// Machine-readable JSON goes to stdout, human logs to stderr. Exit codes:
// 0 ok, 2 usage, 3 data error, 4 checkpoint error, 5 numeric error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cott/checkpoint.hpp"
#include "cott/data.hpp"
#include "cott/error.hpp"
#include "cott/metrics.hpp"
#include "cott/monitors.hpp"
#include "cott/trace_io.hpp"
#include "cott/training.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitCheckpoint = 4;
constexpr int kExitNumeric = 5;

int exit_code_for(const cott::Error& e) {
    switch (e.category()) {
        case cott::ErrorCategory::Data: return kExitData;
        case cott::ErrorCategory::Checkpoint: return kExitCheckpoint;
        case cott::ErrorCategory::Numeric: return kExitNumeric;
    }
    return 1;
}

void emit(const json& payload) { std::cout << payload.dump(2) << std::endl; }

std::vector<double> parse_csv_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            cott::raise(cott::ErrorCode::InvalidConfig, "not a number: '" + item + "'");
        }
    }
    if (out.empty()) cott::raise(cott::ErrorCode::InvalidConfig, "empty list: '" + text + "'");
    return out;
}

struct TrainArgs {
    std::string config_path;
    std::string train_path;
    std::string dev_path;
    std::string out_path;
    std::string log_path;
    std::string task_spec_path;
    std::string kind = "hc";
    std::string template_override;
    std::vector<std::string> step_verbalizer_paths;
    std::string label_verbalizer_path;
    std::uint64_t seed = 0;
    int d_model = 32;
    int n_layers = 2;
    int n_heads = 4;
    int d_ff = 128;
    int max_len = 64;
};

int run_train(const TrainArgs& args) {
    std::string config_path = args.config_path;
    if (config_path.empty()) {
        // env override is for the config path only
        if (const char* env = std::getenv("COTT_CONFIG")) config_path = env;
    }
    cott::TrainConfig config;
    if (!config_path.empty()) config = cott::TrainConfig::parse_file(config_path);
    config.seed = args.seed;
    config.validate();

    std::optional<cott::TaskSpec> declared;
    if (!args.task_spec_path.empty()) {
        std::ifstream in(args.task_spec_path);
        if (!in) cott::raise(cott::ErrorCode::InvalidConfig,
                             "cannot open " + args.task_spec_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            cott::raise(cott::ErrorCode::InvalidConfig,
                        args.task_spec_path + ": " + e.what());
        }
        declared = cott::TaskSpec::from_json(j);
    }

    std::vector<std::string> paths{args.train_path};
    if (!args.dev_path.empty()) paths.push_back(args.dev_path);
    cott::TaskKind kind =
        declared ? declared->kind : cott::task_kind_from_string(args.kind);
    cott::LoadedTask loaded = kind == cott::TaskKind::Re
                                  ? cott::load_re(paths, declared)
                                  : cott::load_hc(paths, declared);

    if (!args.template_override.empty())
        loaded.spec.template_pattern = args.template_override;
    if (!args.step_verbalizer_paths.empty()) {
        if (args.step_verbalizer_paths.size() != loaded.spec.step_words.size())
            cott::raise(cott::ErrorCode::ArityMismatch,
                        "need one --step-verbalizer per [C] slot");
        for (std::size_t s = 0; s < args.step_verbalizer_paths.size(); ++s)
            loaded.spec.step_words[s] =
                cott::read_verbalizer_tsv(args.step_verbalizer_paths[s]);
    }
    if (!args.label_verbalizer_path.empty())
        loaded.spec.label_words = cott::read_verbalizer_tsv(args.label_verbalizer_path);
    loaded.spec.validate();
    for (const auto& split : loaded.splits)
        cott::validate_against_spec(split, loaded.spec);

    const cott::Dataset& train_split = loaded.splits[0];
    const cott::Dataset* dev_split = loaded.splits.size() > 1 ? &loaded.splits[1] : nullptr;

    cott::BackboneConfig backbone_config;
    backbone_config.vocab = cott::build_vocab_tokens(
        loaded.spec, dev_split ? std::vector<const cott::Dataset*>{&train_split, dev_split}
                               : std::vector<const cott::Dataset*>{&train_split});
    backbone_config.d_model = args.d_model;
    backbone_config.n_layers = args.n_layers;
    backbone_config.n_heads = args.n_heads;
    backbone_config.d_ff = args.d_ff;
    backbone_config.max_len = args.max_len;

    cott::ReferenceBackbone backbone(backbone_config, config.seed);
    backbone.bind_virtual_words(loaded.spec.virtual_word_identifiers());
    cott::ProjectionHead head(backbone_config.d_model, config.seed);

    std::ofstream log_stream;
    std::ostream* log = nullptr;
    if (!args.log_path.empty()) {
        log_stream.open(args.log_path);
        if (!log_stream)
            cott::raise(cott::ErrorCode::InvalidConfig, "cannot write " + args.log_path);
        log = &log_stream;
    }

    std::cerr << "training " << cott::to_string(config.variant) << " on "
              << train_split.size() << " instances, " << config.epochs << " epochs\n";
    cott::TrainResult result =
        cott::train(backbone, head, loaded.spec, train_split, dev_split, config, log);

    cott::save_checkpoint(args.out_path, backbone, head, loaded.spec, config.to_json());

    json payload;
    payload["checkpoint"] = args.out_path;
    payload["best_epoch"] = result.best_epoch;
    payload["best_metric"] = result.best_metric;
    payload["selection_split"] = result.selection_split;
    payload["counterfactual_draws"] = result.counterfactual_draws;
    payload["counterfactual_skips"] = result.counterfactual_skips;
    payload["epochs"] = json::array();
    for (const auto& e : result.epochs)
        payload["epochs"].push_back(json{{"epoch", e.epoch},
                                         {"lr", e.lr},
                                         {"mean_loss", e.mean_loss},
                                         {"selection_metric", e.selection_metric}});
    emit(payload);
    return kExitOk;
}

std::vector<cott::ReasoningTrace> predict_dataset(const cott::LoadedCheckpoint& ckpt,
                                                  const cott::Dataset& dataset) {
    cott::PromptSpec spec = ckpt.task.prompt_spec();
    std::vector<cott::ReasoningTrace> traces;
    traces.reserve(dataset.size());
    for (const auto& inst : dataset.instances)
        traces.push_back(cott::predict(*ckpt.backbone, spec, inst.render_input(), inst.id));
    return traces;
}

cott::TrainConfig::Variant checkpoint_variant(const cott::LoadedCheckpoint& ckpt) {
    if (ckpt.train_config_echo && ckpt.train_config_echo->contains("variant")) {
        std::string v = ckpt.train_config_echo->at("variant").get<std::string>();
        if (v == "vanilla") return cott::TrainConfig::Variant::Vanilla;
        if (v == "no_ccl") return cott::TrainConfig::Variant::NoCcl;
    }
    return cott::TrainConfig::Variant::Cott;
}

int run_eval(const std::string& checkpoint_path, const std::string& data_path,
             const std::vector<std::string>& metric_filter,
             const std::string& negative_override, const std::string& variant_override) {
    cott::LoadedCheckpoint ckpt = cott::load_checkpoint(checkpoint_path);
    cott::Dataset data = cott::read_jsonl(data_path, ckpt.task.kind);
    cott::validate_against_spec(data, ckpt.task);

    cott::TrainConfig::Variant variant = checkpoint_variant(ckpt);
    if (!variant_override.empty()) {
        if (variant_override == "cott") variant = cott::TrainConfig::Variant::Cott;
        else if (variant_override == "no_ccl") variant = cott::TrainConfig::Variant::NoCcl;
        else if (variant_override == "vanilla") variant = cott::TrainConfig::Variant::Vanilla;
        else cott::raise(cott::ErrorCode::InvalidConfig,
                         "variant must be cott|no_ccl|vanilla");
    }

    std::vector<cott::ReasoningTrace> traces = predict_dataset(ckpt, data);
    const bool use_step1 = variant == cott::TrainConfig::Variant::Vanilla;

    std::vector<std::string> label_preds, label_golds;
    std::vector<std::vector<std::string>> tuple_preds, tuple_golds;
    std::vector<std::string> joint_preds, joint_golds;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& t = traces[i];
        const auto& inst = data.instances[i];
        std::string pred = use_step1 ? t.label_pred_step1 : t.label_pred;
        label_preds.push_back(pred);
        label_golds.push_back(inst.label);
        std::vector<std::string> pt = t.step_pred;
        pt.push_back(pred);
        std::vector<std::string> gt = inst.step;
        gt.push_back(inst.label);
        tuple_preds.push_back(pt);
        tuple_golds.push_back(gt);
        for (std::size_t s = 0; s < t.step_pred.size(); ++s) {
            joint_preds.push_back("c" + std::to_string(s) + ":" + t.step_pred[s]);
            joint_golds.push_back("c" + std::to_string(s) + ":" + inst.step[s]);
        }
        joint_preds.push_back("y:" + pred);
        joint_golds.push_back("y:" + inst.label);
    }

    json metrics;
    if (ckpt.task.kind == cott::TaskKind::Re) {
        std::string negative = negative_override;
        if (negative.empty() && ckpt.task.negative_label) negative = *ckpt.task.negative_label;
        if (negative.empty())
            cott::raise(cott::ErrorCode::InvalidConfig,
                        "relation evaluation needs a negative label "
                        "(--negative-label or task spec)");
        cott::RelationF1 rf1 = cott::relation_f1(label_preds, label_golds, negative);
        metrics["relation_f1"] = rf1.f1;
        metrics["relation_f1_degenerate"] = rf1.degenerate;
        metrics["hamming_loss"] = cott::hamming_loss(tuple_preds, tuple_golds);
    } else {
        // joint mode flattens every hierarchy level into one pool (default);
        // leaf mode scores the leaf labels only
        std::vector<std::string> joint_labels;
        for (std::size_t s = 0; s < ckpt.task.step_symbols.size(); ++s)
            for (const auto& sym : ckpt.task.step_symbols[s])
                joint_labels.push_back("c" + std::to_string(s) + ":" + sym);
        for (const auto& sym : ckpt.task.label_symbols) joint_labels.push_back("y:" + sym);
        cott::F1Result joint = cott::micro_macro_f1(joint_preds, joint_golds, joint_labels);
        cott::F1Result leaf =
            cott::micro_macro_f1(label_preds, label_golds, ckpt.task.label_symbols);
        metrics["micro_f1"] = joint.micro;
        metrics["macro_f1"] = joint.macro;
        metrics["micro_f1_leaf"] = leaf.micro;
        metrics["macro_f1_leaf"] = leaf.macro;
        metrics["hamming_loss"] = cott::hamming_loss(tuple_preds, tuple_golds);
    }

    if (!metric_filter.empty()) {
        json filtered;
        for (const auto& name : metric_filter) {
            if (!metrics.contains(name))
                cott::raise(cott::ErrorCode::InvalidConfig, "no such metric: " + name);
            filtered[name] = metrics.at(name);
        }
        metrics = filtered;
    }

    json payload;
    payload["count"] = traces.size();
    payload["variant"] = cott::to_string(variant);
    payload["metrics"] = metrics;
    emit(payload);
    return kExitOk;
}

int run_predict(const std::string& checkpoint_path, const std::string& data_path,
                const std::string& out_path) {
    cott::LoadedCheckpoint ckpt = cott::load_checkpoint(checkpoint_path);
    cott::Dataset data = cott::read_jsonl(data_path, ckpt.task.kind);
    cott::validate_against_spec(data, ckpt.task);
    std::vector<cott::ReasoningTrace> traces = predict_dataset(ckpt, data);
    cott::write_file_atomically(out_path, cott::traces_to_jsonl(traces));
    json payload;
    payload["count"] = traces.size();
    payload["traces"] = out_path;
    emit(payload);
    return kExitOk;
}

int run_monitor(const std::string& traces_path, const std::string& gold_path,
                const std::string& kind, bool m1, bool m2) {
    std::vector<cott::ReasoningTrace> traces = cott::read_traces_jsonl(traces_path);
    std::optional<std::vector<cott::GoldRecord>> golds;
    if (!gold_path.empty()) {
        cott::Dataset data =
            cott::read_jsonl(gold_path, cott::task_kind_from_string(kind));
        std::vector<cott::GoldRecord> records;
        records.reserve(data.size());
        for (const auto& inst : data.instances)
            records.push_back({inst.id, inst.step, inst.label});
        golds = std::move(records);
    }
    cott::MonitorOutcome outcome =
        cott::apply_monitors(traces, golds, cott::MonitorFlags{m1, m2});
    json payload = cott::report_to_json(outcome);
    payload["monitors"] = json{{"m1", m1}, {"m2", m2}};
    emit(payload);
    return kExitOk;
}

int run_rectify(double conf, const std::string& p1_csv, const std::string& p2_csv) {
    std::vector<double> p1 = parse_csv_doubles(p1_csv);
    std::vector<double> p2 = parse_csv_doubles(p2_csv);
    if (p1.size() != p2.size())
        cott::raise(cott::ErrorCode::CandidateMismatch,
                    "--p1 and --p2 have different lengths");
    cott::SlotDistribution d1, d2;
    for (std::size_t i = 0; i < p1.size(); ++i) d1.symbols.push_back(std::to_string(i));
    d2.symbols = d1.symbols;
    d1.probs = Eigen::Map<Eigen::VectorXd>(p1.data(), static_cast<Eigen::Index>(p1.size()));
    d2.probs = Eigen::Map<Eigen::VectorXd>(p2.data(), static_cast<Eigen::Index>(p2.size()));
    cott::SlotDistribution rect = cott::rectify(conf, d1, d2);
    json payload;
    payload["conf"] = conf;
    payload["rectified"] =
        std::vector<double>(rect.probs.data(), rect.probs.data() + rect.probs.size());
    emit(payload);
    return kExitOk;
}

struct SynthArgs {
    std::string out_dir;
    cott::SynthSpec spec;
};

int run_synth(const SynthArgs& args) {
    cott::SynthResult result = cott::synth_generate(args.spec);
    std::filesystem::create_directories(args.out_dir);
    auto path = [&](const char* name) { return args.out_dir + "/" + name; };
    json payload;
    payload["task_spec"] = path("taskspec.json");
    cott::write_file_atomically(path("taskspec.json"), result.spec.to_json().dump(2) + "\n");
    auto dump_split = [&](const cott::Dataset& split, const char* name) {
        if (split.empty()) return;
        cott::write_jsonl(split, cott::TaskKind::Synthetic, path(name));
        payload[std::string(name).substr(0, std::string(name).find('.'))] =
            json{{"path", path(name)}, {"count", split.size()}};
    };
    dump_split(result.train, "train.jsonl");
    dump_split(result.dev, "dev.jsonl");
    dump_split(result.test, "test.jsonl");
    emit(payload);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-step cloze reasoning for masked language models"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "tune a model on a dataset");
    train->add_option("--config", train_args.config_path,
                      "train config file (or env COTT_CONFIG)");
    train->add_option("--train", train_args.train_path, "training JSONL")->required();
    train->add_option("--dev", train_args.dev_path, "dev JSONL");
    train->add_option("--out", train_args.out_path, "checkpoint output path")->required();
    train->add_option("--log", train_args.log_path, "per-step JSONL training log");
    train->add_option("--task-spec", train_args.task_spec_path, "task spec JSON");
    train->add_option("--kind", train_args.kind, "task kind: hc|re|synthetic");
    train->add_option("--template", train_args.template_override, "template override");
    train->add_option("--step-verbalizer", train_args.step_verbalizer_paths,
                      "step verbalizer TSV, one per [C] slot");
    train->add_option("--label-verbalizer", train_args.label_verbalizer_path,
                      "label verbalizer TSV");
    train->add_option("--seed", train_args.seed, "random seed")->required();
    train->add_option("--d-model", train_args.d_model, "hidden size");
    train->add_option("--layers", train_args.n_layers, "encoder layers");
    train->add_option("--heads", train_args.n_heads, "attention heads");
    train->add_option("--d-ff", train_args.d_ff, "feed-forward width");
    train->add_option("--max-len", train_args.max_len, "maximum sequence length");

    std::string eval_checkpoint, eval_data, eval_negative, eval_variant;
    std::vector<std::string> eval_metrics;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->add_option("--checkpoint", eval_checkpoint, "model checkpoint")->required();
    eval->add_option("--data", eval_data, "evaluation JSONL")->required();
    eval->add_option("--metrics", eval_metrics, "metric names to emit");
    eval->add_option("--negative-label", eval_negative, "negative relation label");
    eval->add_option("--variant", eval_variant, "prediction path: cott|no_ccl|vanilla");

    std::string predict_checkpoint, predict_data, predict_out;
    auto* predict = app.add_subcommand("predict", "write reasoning traces");
    predict->add_option("--checkpoint", predict_checkpoint, "model checkpoint")->required();
    predict->add_option("--data", predict_data, "input JSONL")->required();
    predict->add_option("--out", predict_out, "trace JSONL output")->required();

    std::string monitor_traces, monitor_gold, monitor_kind = "hc";
    bool monitor_m1 = false, monitor_m2 = false;
    auto* monitor = app.add_subcommand("monitor", "reasoning-process monitors");
    monitor->add_option("--traces", monitor_traces, "trace JSONL")->required();
    monitor->add_option("--gold", monitor_gold, "gold dataset JSONL");
    monitor->add_option("--kind", monitor_kind, "gold task kind: hc|re|synthetic");
    monitor->add_flag("--m1", monitor_m1, "flag prediction inconsistency");
    monitor->add_flag("--m2", monitor_m2, "flag incorrect intermediate steps");

    double rectify_conf = 0.0;
    std::string rectify_p1, rectify_p2;
    auto* rectify = app.add_subcommand("rectify", "standalone probability rectification");
    rectify->add_option("--conf", rectify_conf, "intermediate-step confidence")->required();
    rectify->add_option("--p1", rectify_p1, "step-I probabilities, comma separated")->required();
    rectify->add_option("--p2", rectify_p2, "step-II probabilities, comma separated")->required();

    SynthArgs synth_args;
    bool synth_seed_set = false;
    auto* synth = app.add_subcommand("synth", "generate a synthetic task");
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();
    synth->add_option("--train", synth_args.spec.train_size, "train split size");
    synth->add_option("--dev", synth_args.spec.dev_size, "dev split size");
    synth->add_option("--test", synth_args.spec.test_size, "test split size");
    synth->add_option("--steps", synth_args.spec.num_steps, "intermediate symbol count");
    synth->add_option("--labels", synth_args.spec.num_labels, "label count");
    synth->add_option("--p-clue", synth_args.spec.p_clue, "step-cue probability");
    synth->add_option("--noise", synth_args.spec.noise, "label noise rate");
    synth
        ->add_option_function<std::uint64_t>(
            "--seed",
            [&](std::uint64_t v) {
                synth_args.spec.seed = v;
                synth_seed_set = true;
            },
            "random seed")
        ->required();
    synth->add_option("--text-len", synth_args.spec.text_len, "tokens per text");
    synth->add_option("--distractors", synth_args.spec.distractor_pool, "distractor pool size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*train) return run_train(train_args);
        if (*eval) return run_eval(eval_checkpoint, eval_data, eval_metrics, eval_negative,
                                   eval_variant);
        if (*predict) return run_predict(predict_checkpoint, predict_data, predict_out);
        if (*monitor)
            return run_monitor(monitor_traces, monitor_gold, monitor_kind, monitor_m1,
                               monitor_m2);
        if (*rectify) return run_rectify(rectify_conf, rectify_p1, rectify_p2);
        if (*synth) {
            (void)synth_seed_set;
            return run_synth(synth_args);
        }
    } catch (const cott::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
