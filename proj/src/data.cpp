// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cott/error.hpp"
#include "cott/rng.hpp"

namespace cott {

using nlohmann::json;

std::string to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::Hc: return "hc";
        case TaskKind::Re: return "re";
        case TaskKind::Synthetic: return "synthetic";
    }
    return "hc";
}

TaskKind task_kind_from_string(const std::string& name) {
    if (name == "hc") return TaskKind::Hc;
    if (name == "re") return TaskKind::Re;
    if (name == "synthetic") return TaskKind::Synthetic;
    raise(ErrorCode::InvalidConfig, "unknown task kind: " + name);
}

namespace {

Verbalizer build_verbalizer(const std::vector<TaskSpec::WordMapping>& rows) {
    std::vector<std::pair<std::string, WordEntry>> pairs;
    pairs.reserve(rows.size());
    for (const auto& row : rows)
        pairs.emplace_back(row.symbol, WordEntry{row.word, row.is_virtual});
    return Verbalizer::make(pairs);
}

std::vector<TaskSpec::WordMapping> default_virtual_words(const std::vector<std::string>& symbols,
                                                         const std::string& prefix) {
    std::vector<TaskSpec::WordMapping> rows;
    rows.reserve(symbols.size());
    for (const auto& s : symbols) rows.push_back({s, prefix + s, true});
    return rows;
}

json word_mapping_to_json(const TaskSpec::WordMapping& m) {
    return json{{"symbol", m.symbol}, {"word", m.word}, {"virtual", m.is_virtual}};
}

TaskSpec::WordMapping word_mapping_from_json(const json& j) {
    TaskSpec::WordMapping m;
    m.symbol = j.at("symbol").get<std::string>();
    m.word = j.at("word").get<std::string>();
    m.is_virtual = j.at("virtual").get<bool>();
    return m;
}

}  // namespace

PromptSpec TaskSpec::prompt_spec() const {
    validate();
    PromptSpec spec;
    spec.tmpl = compile_template(template_pattern);
    if (static_cast<int>(step_words.size()) != spec.tmpl.convertible_count)
        raise(ErrorCode::ArityMismatch,
              "task declares " + std::to_string(step_words.size()) +
                  " step verbalizers, template has " +
                  std::to_string(spec.tmpl.convertible_count) + " [C] slots");
    for (const auto& rows : step_words) spec.step_verbalizers.push_back(build_verbalizer(rows));
    spec.label_verbalizer = build_verbalizer(label_words);
    return spec;
}

std::vector<std::string> TaskSpec::virtual_word_identifiers() const {
    std::vector<std::string> out;
    for (const auto& rows : step_words)
        for (const auto& row : rows)
            if (row.is_virtual) out.push_back(row.word);
    for (const auto& row : label_words)
        if (row.is_virtual) out.push_back(row.word);
    return out;
}

std::vector<std::string> TaskSpec::fixed_answer_tokens() const {
    std::vector<std::string> out;
    for (const auto& rows : step_words)
        for (const auto& row : rows)
            if (!row.is_virtual) out.push_back(row.word);
    for (const auto& row : label_words)
        if (!row.is_virtual) out.push_back(row.word);
    return out;
}

void TaskSpec::validate() const {
    if (template_pattern.empty()) raise(ErrorCode::InvalidConfig, "task has no template");
    if (step_symbols.size() != step_words.size())
        raise(ErrorCode::InvalidConfig, "step symbol sets and verbalizers disagree");
    if (label_symbols.empty()) raise(ErrorCode::InvalidConfig, "task has no labels");
    for (std::size_t s = 0; s < step_symbols.size(); ++s) {
        if (step_symbols[s].size() != step_words[s].size())
            raise(ErrorCode::InvalidConfig,
                  "slot " + std::to_string(s) + ": symbols and words disagree");
    }
    if (label_symbols.size() != label_words.size())
        raise(ErrorCode::InvalidConfig, "label symbols and words disagree");
    std::set<std::string> virtuals;
    for (const auto& id : virtual_word_identifiers())
        if (!virtuals.insert(id).second)
            raise(ErrorCode::InvalidConfig, "virtual word reused across verbalizers: " + id);
    if (negative_label &&
        std::find(label_symbols.begin(), label_symbols.end(), *negative_label) ==
            label_symbols.end())
        raise(ErrorCode::InvalidConfig, "negative label is not in the label set");
}

json TaskSpec::to_json() const {
    json j;
    j["kind"] = cott::to_string(kind);
    j["template"] = template_pattern;
    j["step_symbols"] = step_symbols;
    j["label_symbols"] = label_symbols;
    j["step_verbalizers"] = json::array();
    for (const auto& rows : step_words) {
        json slot = json::array();
        for (const auto& row : rows) slot.push_back(word_mapping_to_json(row));
        j["step_verbalizers"].push_back(std::move(slot));
    }
    j["label_verbalizer"] = json::array();
    for (const auto& row : label_words) j["label_verbalizer"].push_back(word_mapping_to_json(row));
    if (negative_label) j["negative_label"] = *negative_label;
    return j;
}

TaskSpec TaskSpec::from_json(const json& j) {
    TaskSpec spec;
    try {
        spec.kind = task_kind_from_string(j.at("kind").get<std::string>());
        spec.template_pattern = j.at("template").get<std::string>();
        spec.step_symbols = j.at("step_symbols").get<std::vector<std::vector<std::string>>>();
        spec.label_symbols = j.at("label_symbols").get<std::vector<std::string>>();
        for (const auto& slot : j.at("step_verbalizers")) {
            std::vector<WordMapping> rows;
            for (const auto& row : slot) rows.push_back(word_mapping_from_json(row));
            spec.step_words.push_back(std::move(rows));
        }
        for (const auto& row : j.at("label_verbalizer"))
            spec.label_words.push_back(word_mapping_from_json(row));
        if (j.contains("negative_label") && !j.at("negative_label").is_null())
            spec.negative_label = j.at("negative_label").get<std::string>();
    } catch (const json::exception& e) {
        raise(ErrorCode::InvalidConfig, std::string("task spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

namespace {

json parse_line(const std::string& line, const std::string& path, std::size_t line_no) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        raise(ErrorCode::InvalidConfig,
              path + ":" + std::to_string(line_no) + ": not valid JSON: " + e.what());
    }
}

template <typename T>
T require_field(const json& j, const char* field, const std::string& path, std::size_t line_no) {
    if (!j.contains(field))
        raise(ErrorCode::MissingField,
              path + ":" + std::to_string(line_no) + ": missing field \"" + field + "\"");
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        raise(ErrorCode::MissingField,
              path + ":" + std::to_string(line_no) + ": field \"" + field + "\" has wrong type");
    }
}

std::vector<std::string> text_field(const json& j, const std::string& path, std::size_t line_no) {
    if (!j.contains("text"))
        raise(ErrorCode::MissingField, path + ":" + std::to_string(line_no) +
                                           ": missing field \"text\"");
    const auto& t = j.at("text");
    if (t.is_string()) return whitespace_tokenize(t.get<std::string>());
    if (t.is_array()) {
        std::vector<std::string> out;
        for (const auto& tok : t) out.push_back(tok.get<std::string>());
        return out;
    }
    raise(ErrorCode::MissingField,
          path + ":" + std::to_string(line_no) + ": field \"text\" has wrong type");
}

Instance parse_hc_record(const json& j, const std::string& path, std::size_t line_no) {
    Instance inst;
    inst.id = j.contains("id") ? j.at("id").get<std::string>()
                               : "line" + std::to_string(line_no);
    inst.text = text_field(j, path, line_no);
    inst.step = {require_field<std::string>(j, "domain", path, line_no)};
    inst.label = require_field<std::string>(j, "area", path, line_no);
    return inst;
}

Instance parse_re_record(const json& j, const std::string& path, std::size_t line_no) {
    Instance inst;
    inst.id = j.contains("id") ? j.at("id").get<std::string>()
                               : "line" + std::to_string(line_no);
    inst.text = require_field<std::vector<std::string>>(j, "tokens", path, line_no);
    auto subj = require_field<std::vector<long>>(j, "subj_span", path, line_no);
    auto obj = require_field<std::vector<long>>(j, "obj_span", path, line_no);
    auto check_span = [&](const std::vector<long>& span, const char* name) {
        if (span.size() != 2 || span[0] < 0 || span[1] <= span[0] ||
            span[1] > static_cast<long>(inst.text.size()))
            raise(ErrorCode::SpanOutOfBounds,
                  path + ":" + std::to_string(line_no) + ": bad " + name);
        return std::vector<std::string>(inst.text.begin() + span[0],
                                        inst.text.begin() + span[1]);
    };
    inst.anchors["SUBJ"] = check_span(subj, "subj_span");
    inst.anchors["OBJ"] = check_span(obj, "obj_span");
    inst.step = {require_field<std::string>(j, "subj_type", path, line_no),
                 require_field<std::string>(j, "obj_type", path, line_no)};
    inst.label = require_field<std::string>(j, "relation", path, line_no);
    return inst;
}

json hc_record_to_json(const Instance& inst) {
    std::ostringstream text;
    for (std::size_t i = 0; i < inst.text.size(); ++i) {
        if (i) text << ' ';
        text << inst.text[i];
    }
    return json{{"id", inst.id}, {"text", text.str()}, {"domain", inst.step.at(0)},
                {"area", inst.label}};
}

json re_record_to_json(const Instance& inst) {
    auto find_span = [&](const std::string& key) {
        const auto& sub = inst.anchors.at(key);
        for (std::size_t s = 0; s + sub.size() <= inst.text.size(); ++s) {
            bool match = true;
            for (std::size_t k = 0; k < sub.size(); ++k)
                if (inst.text[s + k] != sub[k]) { match = false; break; }
            if (match) return std::vector<long>{static_cast<long>(s),
                                                static_cast<long>(s + sub.size())};
        }
        raise(ErrorCode::SpanOutOfBounds, "anchor tokens not found in text: " + key);
    };
    return json{{"id", inst.id},          {"tokens", inst.text},
                {"subj_span", find_span("SUBJ")}, {"obj_span", find_span("OBJ")},
                {"subj_type", inst.step.at(0)},   {"obj_type", inst.step.at(1)},
                {"relation", inst.label}};
}

}  // namespace

Dataset read_jsonl(const std::string& path, TaskKind kind) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::InvalidConfig, "cannot open " + path);
    Dataset out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, path, line_no);
        out.instances.push_back(kind == TaskKind::Re ? parse_re_record(j, path, line_no)
                                                     : parse_hc_record(j, path, line_no));
    }
    if (out.empty()) raise(ErrorCode::EmptyDataset, path);
    return out;
}

void write_jsonl(const Dataset& dataset, TaskKind kind, const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::InvalidConfig, "cannot write " + path);
    for (const auto& inst : dataset.instances) {
        json j = kind == TaskKind::Re ? re_record_to_json(inst) : hc_record_to_json(inst);
        out << j.dump() << '\n';
    }
}

std::vector<TaskSpec::WordMapping> read_verbalizer_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::InvalidConfig, "cannot open " + path);
    std::vector<TaskSpec::WordMapping> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            raise(ErrorCode::InvalidConfig,
                  path + ":" + std::to_string(line_no) + ": expected symbol<TAB>word");
        TaskSpec::WordMapping row;
        row.symbol = line.substr(0, tab);
        std::string word = line.substr(tab + 1);
        if (row.symbol.empty() || word.empty())
            raise(ErrorCode::InvalidConfig,
                  path + ":" + std::to_string(line_no) + ": empty column");
        if (word[0] == '@') {
            row.is_virtual = true;
            row.word = word.substr(1);
        } else {
            row.is_virtual = false;
            row.word = word;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) raise(ErrorCode::EmptyDataset, path);
    return rows;
}

void write_verbalizer_tsv(const std::vector<TaskSpec::WordMapping>& rows,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::InvalidConfig, "cannot write " + path);
    for (const auto& row : rows)
        out << row.symbol << '\t' << (row.is_virtual ? "@" : "") << row.word << '\n';
}

namespace {

std::vector<std::string> sorted_unique(std::set<std::string> values) {
    return {values.begin(), values.end()};
}

LoadedTask load_task(const std::vector<std::string>& paths, TaskKind kind,
                     const std::optional<TaskSpec>& declared) {
    if (paths.empty()) raise(ErrorCode::InvalidConfig, "no dataset paths given");
    LoadedTask out;
    for (const auto& path : paths) out.splits.push_back(read_jsonl(path, kind));

    if (declared) {
        out.spec = *declared;
    } else if (kind == TaskKind::Re) {
        std::set<std::string> subj, obj, rel;
        for (const auto& split : out.splits)
            for (const auto& inst : split.instances) {
                subj.insert(inst.step[0]);
                obj.insert(inst.step[1]);
                rel.insert(inst.label);
            }
        out.spec.kind = kind;
        out.spec.template_pattern = kReDefaultTemplate;
        out.spec.step_symbols = {sorted_unique(subj), sorted_unique(obj)};
        out.spec.label_symbols = sorted_unique(rel);
        out.spec.step_words = {default_virtual_words(out.spec.step_symbols[0], "c0:"),
                               default_virtual_words(out.spec.step_symbols[1], "c1:")};
        out.spec.label_words = default_virtual_words(out.spec.label_symbols, "y:");
        if (rel.count("no_relation")) out.spec.negative_label = "no_relation";
    } else {
        std::set<std::string> domains, areas;
        for (const auto& split : out.splits)
            for (const auto& inst : split.instances) {
                domains.insert(inst.step[0]);
                areas.insert(inst.label);
            }
        out.spec.kind = kind;
        out.spec.template_pattern = kHcDefaultTemplate;
        out.spec.step_symbols = {sorted_unique(domains)};
        out.spec.label_symbols = sorted_unique(areas);
        out.spec.step_words = {default_virtual_words(out.spec.step_symbols[0], "c0:")};
        out.spec.label_words = default_virtual_words(out.spec.label_symbols, "y:");
    }
    out.spec.validate();
    for (const auto& split : out.splits) validate_against_spec(split, out.spec);
    return out;
}

}  // namespace

LoadedTask load_hc(const std::vector<std::string>& paths,
                   const std::optional<TaskSpec>& declared) {
    return load_task(paths, TaskKind::Hc, declared);
}

LoadedTask load_re(const std::vector<std::string>& paths,
                   const std::optional<TaskSpec>& declared) {
    return load_task(paths, TaskKind::Re, declared);
}

void validate_against_spec(const Dataset& dataset, const TaskSpec& spec) {
    for (const auto& inst : dataset.instances) {
        if (inst.step.size() != spec.step_symbols.size())
            raise(ErrorCode::ArityMismatch,
                  inst.id + ": step tuple arity does not match the task");
        for (std::size_t s = 0; s < inst.step.size(); ++s) {
            const auto& set = spec.step_symbols[s];
            if (std::find(set.begin(), set.end(), inst.step[s]) == set.end())
                raise(ErrorCode::UnknownLabel,
                      inst.id + ": step symbol not declared: " + inst.step[s]);
        }
        if (std::find(spec.label_symbols.begin(), spec.label_symbols.end(), inst.label) ==
            spec.label_symbols.end())
            raise(ErrorCode::UnknownLabel, inst.id + ": label not declared: " + inst.label);
    }
}

std::string synth_step_symbol(int step_idx) { return "S" + std::to_string(step_idx); }
std::string synth_label_symbol(int label_idx) { return "L" + std::to_string(label_idx); }

SynthResult synth_generate(const SynthSpec& spec) {
    if (spec.train_size < 0 || spec.dev_size < 0 || spec.test_size < 0 ||
        spec.train_size + spec.dev_size + spec.test_size == 0)
        raise(ErrorCode::InvalidConfig, "synthetic split sizes must be non-negative, not all 0");
    if (spec.num_steps < 1 || spec.num_labels < spec.num_steps)
        raise(ErrorCode::InvalidConfig, "need num_labels >= num_steps >= 1");
    if (spec.p_clue < 0.0 || spec.p_clue > 1.0 || spec.noise < 0.0 || spec.noise > 1.0)
        raise(ErrorCode::InvalidConfig, "p_clue and noise must lie in [0, 1]");
    if (spec.text_len < 2 || spec.distractor_pool < 1)
        raise(ErrorCode::InvalidConfig, "text_len >= 2 and distractor_pool >= 1 required");

    SynthResult out;
    out.spec.kind = TaskKind::Synthetic;
    out.spec.template_pattern = kSynthDefaultTemplate;
    std::vector<std::string> steps, labels;
    for (int s = 0; s < spec.num_steps; ++s) steps.push_back(synth_step_symbol(s));
    for (int y = 0; y < spec.num_labels; ++y) labels.push_back(synth_label_symbol(y));
    out.spec.step_symbols = {steps};
    out.spec.label_symbols = labels;
    std::vector<TaskSpec::WordMapping> step_rows, label_rows;
    for (int s = 0; s < spec.num_steps; ++s)
        step_rows.push_back({steps[s], "vs" + std::to_string(s), false});
    for (int y = 0; y < spec.num_labels; ++y)
        label_rows.push_back({labels[y], "vl" + std::to_string(y), false});
    out.spec.step_words = {step_rows};
    out.spec.label_words = label_rows;
    out.spec.validate();

    std::mt19937_64 rng(mix_seed(spec.seed, 0x73796e74));
    auto generate_split = [&](int count, const char* name) {
        Dataset split;
        for (int i = 0; i < count; ++i) {
            int label_idx = static_cast<int>(bounded_index(rng, spec.num_labels));
            int step_idx = label_idx % spec.num_steps;
            int group_idx = label_idx / spec.num_steps;

            Instance inst;
            inst.id = std::string(name) + "-" + std::to_string(i);
            bool has_clue = uniform_double(rng) < spec.p_clue;
            inst.text.push_back(
                has_clue ? "c" + std::to_string(step_idx)
                         : "w" + std::to_string(bounded_index(rng, spec.distractor_pool)));
            inst.text.push_back("g" + std::to_string(group_idx));
            for (int t = 2; t < spec.text_len; ++t)
                inst.text.push_back("w" +
                                    std::to_string(bounded_index(rng, spec.distractor_pool)));
            shuffle_in_place(inst.text, rng);

            inst.step = {steps[step_idx]};
            int final_label = label_idx;
            if (spec.noise > 0.0 && uniform_double(rng) < spec.noise) {
                int other = static_cast<int>(bounded_index(rng, spec.num_labels - 1));
                final_label = other >= label_idx ? other + 1 : other;
            }
            inst.label = labels[final_label];
            split.instances.push_back(std::move(inst));
        }
        return split;
    };
    out.train = generate_split(spec.train_size, "train");
    out.dev = generate_split(spec.dev_size, "dev");
    out.test = generate_split(spec.test_size, "test");
    return out;
}

std::vector<std::string> build_vocab_tokens(const TaskSpec& spec,
                                            const std::vector<const Dataset*>& splits) {
    std::set<std::string> tokens;
    for (const auto* split : splits)
        for (const auto& inst : split->instances)
            tokens.insert(inst.text.begin(), inst.text.end());
    Template tmpl = compile_template(spec.template_pattern);
    for (const auto& seg : tmpl.segments)
        if (seg.kind == Template::Segment::Kind::Literal)
            for (const auto& tok : whitespace_tokenize(seg.literal)) tokens.insert(tok);
    for (const auto& word : spec.fixed_answer_tokens()) tokens.insert(word);
    return {tokens.begin(), tokens.end()};
}

}  // namespace cott
