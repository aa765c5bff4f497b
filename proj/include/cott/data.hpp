// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cott/prompt.hpp"

namespace cott {

// One labeled example: text tokens, the gold intermediate-step tuple and the
// gold label. Relation instances also carry the subject/object surface forms
// substituted at the SUBJ/OBJ anchors when rendering.
struct Instance {
    std::string id;
    std::vector<std::string> text;
    std::vector<std::string> step;
    std::string label;
    std::map<std::string, std::vector<std::string>> anchors;

    RenderInput render_input() const { return {text, anchors}; }

    friend bool operator==(const Instance&, const Instance&) = default;
};

struct Dataset {
    std::vector<Instance> instances;

    bool empty() const { return instances.empty(); }
    std::size_t size() const { return instances.size(); }
};

enum class TaskKind { Hc, Re, Synthetic };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

// Everything the reasoner needs to run one task: the template, the symbol
// sets and the verbalizer tables. Serializes to a single JSON document and is
// echoed into checkpoints.
struct TaskSpec {
    struct WordMapping {
        std::string symbol;
        std::string word;
        bool is_virtual = true;
    };

    TaskKind kind = TaskKind::Hc;
    std::string template_pattern;
    std::vector<std::vector<std::string>> step_symbols;  // per [C] slot
    std::vector<std::string> label_symbols;
    std::vector<std::vector<WordMapping>> step_words;  // per slot
    std::vector<WordMapping> label_words;
    std::optional<std::string> negative_label;

    PromptSpec prompt_spec() const;
    std::vector<std::string> virtual_word_identifiers() const;
    std::vector<std::string> fixed_answer_tokens() const;
    void validate() const;

    nlohmann::json to_json() const;
    static TaskSpec from_json(const nlohmann::json& j);
};

constexpr const char* kHcDefaultTemplate = "[T], the domain is [C], the area is [A].";
constexpr const char* kReDefaultTemplate = "[T], the SUBJ [C] is [A] of the OBJ [C].";
constexpr const char* kSynthDefaultTemplate = "[T], the kind is [C], the target is [A].";

struct LoadedTask {
    TaskSpec spec;
    std::vector<Dataset> splits;  // aligned with the given paths
};

// JSONL loaders. Records: HC {text, domain, area}; RE {tokens, subj_span,
// obj_span, subj_type, obj_type, relation}; ids optional. When a declared
// spec is given symbols are validated against it, otherwise the symbol sets
// are induced from the data (sorted) with default template and verbalizers.
LoadedTask load_hc(const std::vector<std::string>& paths,
                   const std::optional<TaskSpec>& declared = std::nullopt);
LoadedTask load_re(const std::vector<std::string>& paths,
                   const std::optional<TaskSpec>& declared = std::nullopt);

Dataset read_jsonl(const std::string& path, TaskKind kind);
void write_jsonl(const Dataset& dataset, TaskKind kind, const std::string& path);

// Two-column symbol<TAB>word verbalizer table; a leading '@' marks a
// learnable virtual word.
std::vector<TaskSpec::WordMapping> read_verbalizer_tsv(const std::string& path);
void write_verbalizer_tsv(const std::vector<TaskSpec::WordMapping>& rows,
                          const std::string& path);

// Seeded synthetic task: every text carries a label-group cue and, with
// probability p_clue, the step cue; the label is a function of (step, group).
// A reader that finds both cues recovers the label exactly when noise is 0.
struct SynthSpec {
    int train_size = 0;
    int dev_size = 0;
    int test_size = 0;
    int num_steps = 7;
    int num_labels = 14;
    double p_clue = 1.0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    int text_len = 8;
    int distractor_pool = 40;
};

struct SynthResult {
    TaskSpec spec;
    Dataset train, dev, test;
};

SynthResult synth_generate(const SynthSpec& spec);

// Step/label symbols of instance `label_idx` in the synthetic task.
std::string synth_step_symbol(int step_idx);
std::string synth_label_symbol(int label_idx);

void validate_against_spec(const Dataset& dataset, const TaskSpec& spec);

// Closed whitespace vocabulary over the given splits, template literals and
// fixed answer words; sorted for determinism.
std::vector<std::string> build_vocab_tokens(const TaskSpec& spec,
                                            const std::vector<const Dataset*>& splits);

}  // namespace cott
