// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cott {

// An answer word scored by the cloze head: either a token of the base
// vocabulary or a learnable virtual word identified by a unique name that the
// backend resolves to an embedding row.
struct WordEntry {
    std::string word;
    bool is_virtual = false;

    friend bool operator==(const WordEntry& a, const WordEntry& b) {
        return a.word == b.word && a.is_virtual == b.is_virtual;
    }
    friend bool operator<(const WordEntry& a, const WordEntry& b) {
        return std::tie(a.is_virtual, a.word) < std::tie(b.is_virtual, b.word);
    }
};

// Injective symbol <-> answer-word map.
class Verbalizer {
public:
    Verbalizer() = default;
    static Verbalizer make(std::vector<std::pair<std::string, WordEntry>> pairs);

    const WordEntry& verbalize(const std::string& symbol) const;
    const std::string& unverbalize(const WordEntry& word) const;
    bool has_symbol(const std::string& symbol) const;

    const std::vector<std::string>& symbols() const { return symbols_; }
    const std::vector<WordEntry>& entries() const { return entries_; }
    std::size_t size() const { return symbols_.size(); }

private:
    std::vector<std::string> symbols_;
    std::vector<WordEntry> entries_;
    std::map<std::string, std::size_t> by_symbol_;
    std::map<WordEntry, std::size_t> by_word_;
};

// Textual pattern with one [T] slot, one [A] slot and >= 1 [C] slots.
// Literal runs are kept verbatim; they are split into tokens at render time.
struct Template {
    struct Segment {
        enum class Kind { Literal, Text, Convertible, Answer };
        Kind kind;
        std::string literal;  // Kind::Literal only
        int slot_index = -1;  // Kind::Convertible only
    };

    std::string pattern;
    std::vector<Segment> segments;
    int convertible_count = 0;
};

Template compile_template(const std::string& pattern);

enum class SlotFill { Masked, Injected };

struct PromptToken {
    enum class Kind { Word, Mask, Entry };
    Kind kind = Kind::Word;
    std::string word;      // Kind::Word
    WordEntry entry;       // Kind::Entry
};

// A rendered prompt: the token sequence plus the role-tagged positions the
// backend is asked about.
struct PromptInstance {
    struct Convertible {
        int position = -1;
        SlotFill fill = SlotFill::Masked;
        std::optional<std::string> symbol;  // injected symbol, step II only
    };

    std::vector<PromptToken> tokens;
    int answer_position = -1;
    std::vector<Convertible> convertibles;

    int mask_count() const;
};

// Text plus optional literal-token substitutions (RE injects the subject and
// object surface forms at the SUBJ/OBJ anchors).
struct RenderInput {
    std::vector<std::string> text;
    std::map<std::string, std::vector<std::string>> anchors;
};

std::vector<std::string> whitespace_tokenize(const std::string& run);

PromptInstance render_step1(const Template& tmpl, const RenderInput& input);

PromptInstance render_step2(const Template& tmpl, const RenderInput& input,
                            const std::vector<std::string>& step,
                            const std::vector<Verbalizer>& step_verbalizers);

// Template and verbalizers for one task, the unit the reasoner works against.
struct PromptSpec {
    Template tmpl;
    std::vector<Verbalizer> step_verbalizers;  // one per [C] slot
    Verbalizer label_verbalizer;
};

}  // namespace cott
