// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/prompt.hpp"

#include <sstream>

#include "cott/error.hpp"

namespace cott {

Verbalizer Verbalizer::make(std::vector<std::pair<std::string, WordEntry>> pairs) {
    Verbalizer v;
    for (auto& [symbol, entry] : pairs) {
        if (v.by_symbol_.count(symbol))
            raise(ErrorCode::InvalidConfig, "verbalizer maps symbol twice: " + symbol);
        if (v.by_word_.count(entry))
            raise(ErrorCode::InvalidConfig,
                  "verbalizer is not injective, word reused: " + entry.word);
        v.by_symbol_[symbol] = v.symbols_.size();
        v.by_word_[entry] = v.symbols_.size();
        v.symbols_.push_back(symbol);
        v.entries_.push_back(std::move(entry));
    }
    return v;
}

const WordEntry& Verbalizer::verbalize(const std::string& symbol) const {
    auto it = by_symbol_.find(symbol);
    if (it == by_symbol_.end()) raise(ErrorCode::UnknownSymbol, symbol);
    return entries_[it->second];
}

const std::string& Verbalizer::unverbalize(const WordEntry& word) const {
    auto it = by_word_.find(word);
    if (it == by_word_.end()) raise(ErrorCode::UnknownWord, word.word);
    return symbols_[it->second];
}

bool Verbalizer::has_symbol(const std::string& symbol) const {
    return by_symbol_.count(symbol) != 0;
}

Template compile_template(const std::string& pattern) {
    Template tmpl;
    tmpl.pattern = pattern;
    int text_slots = 0;
    int answer_slots = 0;
    std::string literal;

    auto flush_literal = [&] {
        if (!literal.empty()) {
            tmpl.segments.push_back({Template::Segment::Kind::Literal, literal, -1});
            literal.clear();
        }
    };

    for (std::size_t i = 0; i < pattern.size(); ++i) {
        char c = pattern[i];
        if (c == ']')
            raise(ErrorCode::MalformedTemplate, "unbalanced ']' at offset " + std::to_string(i));
        if (c != '[') {
            literal.push_back(c);
            continue;
        }
        if (i + 2 >= pattern.size() || pattern[i + 2] != ']')
            raise(ErrorCode::MalformedTemplate, "unbalanced '[' at offset " + std::to_string(i));
        char slot = pattern[i + 1];
        flush_literal();
        switch (slot) {
            case 'T':
                tmpl.segments.push_back({Template::Segment::Kind::Text, "", -1});
                ++text_slots;
                break;
            case 'A':
                tmpl.segments.push_back({Template::Segment::Kind::Answer, "", -1});
                ++answer_slots;
                break;
            case 'C':
                tmpl.segments.push_back(
                    {Template::Segment::Kind::Convertible, "", tmpl.convertible_count});
                ++tmpl.convertible_count;
                break;
            default:
                raise(ErrorCode::MalformedTemplate,
                      std::string("unknown slot marker [") + slot + "]");
        }
        i += 2;
    }
    flush_literal();

    if (text_slots != 1)
        raise(ErrorCode::MalformedTemplate,
              "expected exactly one [T], found " + std::to_string(text_slots));
    if (answer_slots != 1)
        raise(ErrorCode::MalformedTemplate,
              "expected exactly one [A], found " + std::to_string(answer_slots));
    if (tmpl.convertible_count < 1)
        raise(ErrorCode::MalformedTemplate, "expected at least one [C]");
    return tmpl;
}

int PromptInstance::mask_count() const {
    int n = 0;
    for (const auto& t : tokens)
        if (t.kind == PromptToken::Kind::Mask) ++n;
    return n;
}

std::vector<std::string> whitespace_tokenize(const std::string& run) {
    std::vector<std::string> out;
    std::istringstream in(run);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

namespace {

void append_literal(PromptInstance& prompt, const std::string& literal,
                    const std::map<std::string, std::vector<std::string>>& anchors) {
    for (auto& tok : whitespace_tokenize(literal)) {
        auto it = anchors.find(tok);
        if (it == anchors.end()) {
            prompt.tokens.push_back({PromptToken::Kind::Word, tok, {}});
        } else {
            for (const auto& sub : it->second)
                prompt.tokens.push_back({PromptToken::Kind::Word, sub, {}});
        }
    }
}

PromptInstance render(const Template& tmpl, const RenderInput& input,
                      const std::vector<std::string>* step,
                      const std::vector<Verbalizer>* step_verbalizers) {
    if (input.text.empty()) raise(ErrorCode::EmptyText, "text slot requires tokens");
    if (step != nullptr) {
        if (static_cast<int>(step->size()) != tmpl.convertible_count)
            raise(ErrorCode::ArityMismatch,
                  "step has " + std::to_string(step->size()) + " components, template has " +
                      std::to_string(tmpl.convertible_count) + " [C] slots");
        if (step_verbalizers == nullptr ||
            static_cast<int>(step_verbalizers->size()) != tmpl.convertible_count)
            raise(ErrorCode::ArityMismatch, "one step verbalizer required per [C] slot");
    }

    PromptInstance prompt;
    for (const auto& seg : tmpl.segments) {
        switch (seg.kind) {
            case Template::Segment::Kind::Literal:
                append_literal(prompt, seg.literal, input.anchors);
                break;
            case Template::Segment::Kind::Text:
                for (const auto& tok : input.text)
                    prompt.tokens.push_back({PromptToken::Kind::Word, tok, {}});
                break;
            case Template::Segment::Kind::Answer:
                prompt.answer_position = static_cast<int>(prompt.tokens.size());
                prompt.tokens.push_back({PromptToken::Kind::Mask, "", {}});
                break;
            case Template::Segment::Kind::Convertible: {
                PromptInstance::Convertible conv;
                conv.position = static_cast<int>(prompt.tokens.size());
                if (step == nullptr) {
                    conv.fill = SlotFill::Masked;
                    prompt.tokens.push_back({PromptToken::Kind::Mask, "", {}});
                } else {
                    const std::string& symbol = (*step)[seg.slot_index];
                    const WordEntry& entry =
                        (*step_verbalizers)[seg.slot_index].verbalize(symbol);
                    conv.fill = SlotFill::Injected;
                    conv.symbol = symbol;
                    prompt.tokens.push_back({PromptToken::Kind::Entry, "", entry});
                }
                prompt.convertibles.push_back(std::move(conv));
                break;
            }
        }
    }
    return prompt;
}

}  // namespace

PromptInstance render_step1(const Template& tmpl, const RenderInput& input) {
    return render(tmpl, input, nullptr, nullptr);
}

PromptInstance render_step2(const Template& tmpl, const RenderInput& input,
                            const std::vector<std::string>& step,
                            const std::vector<Verbalizer>& step_verbalizers) {
    return render(tmpl, input, &step, &step_verbalizers);
}

}  // namespace cott
