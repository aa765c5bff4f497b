// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <random>

#include "cott/error.hpp"
#include "cott/prompt.hpp"
#include "cott/rng.hpp"

using namespace cott;

namespace {

const char* kHcPattern = "[T], the domain is [C], the area is [A].";
const char* kRePattern = "[T], the SUBJ [C] is [A] of the OBJ [C].";

Verbalizer domain_verbalizer() {
    return Verbalizer::make({{"Biochemistry", {"c0:Biochemistry", true}},
                             {"Medical", {"c0:Medical", true}},
                             {"CS", {"c0:CS", true}}});
}

bool code_is(const Error& e, ErrorCode code) { return e.code() == code; }

}  // namespace

TEST_CASE("compile_template keeps slots in textual order") {
    Template hc = compile_template(kHcPattern);
    std::vector<Template::Segment::Kind> kinds;
    for (const auto& seg : hc.segments) kinds.push_back(seg.kind);
    CHECK(kinds == std::vector<Template::Segment::Kind>{
                       Template::Segment::Kind::Text, Template::Segment::Kind::Literal,
                       Template::Segment::Kind::Convertible, Template::Segment::Kind::Literal,
                       Template::Segment::Kind::Answer, Template::Segment::Kind::Literal});
    CHECK(hc.convertible_count == 1);

    Template re = compile_template(kRePattern);
    CHECK(re.convertible_count == 2);
    std::vector<int> slots;
    for (const auto& seg : re.segments)
        if (seg.kind == Template::Segment::Kind::Convertible) slots.push_back(seg.slot_index);
    CHECK(slots == std::vector<int>{0, 1});
}

TEST_CASE("compile_template rejects malformed patterns") {
    auto expect_malformed = [](const char* pattern) {
        try {
            compile_template(pattern);
            FAIL_CHECK("expected MalformedTemplate for: " << pattern);
        } catch (const Error& e) {
            CHECK(code_is(e, ErrorCode::MalformedTemplate));
        }
    };
    expect_malformed("[T] [A]");             // no [C]
    expect_malformed("[T] [C]");             // no [A]
    expect_malformed("[C] is [A]");          // no [T]
    expect_malformed("[T] [T] [C] [A]");     // duplicate [T]
    expect_malformed("[T] [C] [A] [A]");     // duplicate [A]
    expect_malformed("[T] [C [A]");          // unbalanced bracket
    expect_malformed("[T] ] [C] [A]");       // stray bracket
    expect_malformed("[T] [X] [C] [A]");     // unknown marker
}

TEST_CASE("render_step1 masks every convertible and the answer") {
    Template hc = compile_template(kHcPattern);
    RenderInput input{{"rodents", "decline"}, {}};
    PromptInstance prompt = render_step1(hc, input);

    CHECK(prompt.mask_count() == hc.convertible_count + 1);
    CHECK(prompt.convertibles.size() == 1);
    CHECK(prompt.convertibles[0].fill == SlotFill::Masked);
    CHECK(prompt.answer_position >= 0);
    CHECK(prompt.tokens[prompt.answer_position].kind == PromptToken::Kind::Mask);

    // "[T], ..." -> text tokens then "," as its own token
    CHECK(prompt.tokens[0].word == "rodents");
    CHECK(prompt.tokens[1].word == "decline");
    CHECK(prompt.tokens[2].word == ",");

    Template re = compile_template(kRePattern);
    PromptInstance reprompt = render_step1(re, input);
    CHECK(reprompt.mask_count() == 3);
    CHECK(reprompt.convertibles.size() == 2);
}

TEST_CASE("render_step1 requires text") {
    Template hc = compile_template(kHcPattern);
    try {
        render_step1(hc, RenderInput{{}, {}});
        FAIL_CHECK("expected EmptyText");
    } catch (const Error& e) {
        CHECK(code_is(e, ErrorCode::EmptyText));
    }
}

TEST_CASE("rendering is deterministic") {
    Template hc = compile_template(kHcPattern);
    RenderInput input{{"a", "b", "c"}, {}};
    PromptInstance p1 = render_step1(hc, input);
    PromptInstance p2 = render_step1(hc, input);
    REQUIRE(p1.tokens.size() == p2.tokens.size());
    for (std::size_t i = 0; i < p1.tokens.size(); ++i) {
        CHECK(p1.tokens[i].kind == p2.tokens[i].kind);
        CHECK(p1.tokens[i].word == p2.tokens[i].word);
    }
    CHECK(p1.answer_position == p2.answer_position);
}

TEST_CASE("render_step2 injects the verbalized step") {
    Template hc = compile_template(kHcPattern);
    RenderInput input{{"rodents", "decline"}, {}};
    std::vector<Verbalizer> verbalizers{domain_verbalizer()};
    PromptInstance prompt = render_step2(hc, input, {"Biochemistry"}, verbalizers);

    CHECK(prompt.mask_count() == 1);  // only the answer slot stays masked
    REQUIRE(prompt.convertibles.size() == 1);
    CHECK(prompt.convertibles[0].fill == SlotFill::Injected);
    CHECK(prompt.convertibles[0].symbol == "Biochemistry");
    const auto& tok = prompt.tokens[prompt.convertibles[0].position];
    CHECK(tok.kind == PromptToken::Kind::Entry);
    CHECK(tok.entry.word == "c0:Biochemistry");
    CHECK(tok.entry.is_virtual);
}

TEST_CASE("render_step2 answer position matches step I for one-token entries") {
    Template hc = compile_template(kHcPattern);
    RenderInput input{{"x", "y", "z", "w"}, {}};
    std::vector<Verbalizer> verbalizers{domain_verbalizer()};
    PromptInstance s1 = render_step1(hc, input);
    PromptInstance s2 = render_step2(hc, input, {"CS"}, verbalizers);
    // every injected entry is exactly one token, so the length delta is zero
    CHECK(s1.tokens.size() == s2.tokens.size());
    CHECK(s1.answer_position == s2.answer_position);
}

TEST_CASE("render_step2 arity and symbol errors") {
    Template re = compile_template(kRePattern);
    RenderInput input{{"a"}, {}};
    std::vector<Verbalizer> verbalizers{domain_verbalizer(), domain_verbalizer()};
    try {
        render_step2(re, input, {"CS"}, verbalizers);
        FAIL_CHECK("expected ArityMismatch");
    } catch (const Error& e) {
        CHECK(code_is(e, ErrorCode::ArityMismatch));
    }
    try {
        render_step2(re, input, {"CS", "Botany"}, verbalizers);
        FAIL_CHECK("expected UnknownSymbol");
    } catch (const Error& e) {
        CHECK(code_is(e, ErrorCode::UnknownSymbol));
    }
}

TEST_CASE("RE anchors substitute subject and object surface forms") {
    Template re = compile_template(kRePattern);
    RenderInput input{{"he", "joined", "acme", "corp"},
                      {{"SUBJ", {"he"}}, {"OBJ", {"acme", "corp"}}}};
    PromptInstance prompt = render_step2(re, input, {"CS", "CS"},
                                         {domain_verbalizer(), domain_verbalizer()});
    std::vector<std::string> words;
    for (const auto& tok : prompt.tokens)
        if (tok.kind == PromptToken::Kind::Word) words.push_back(tok.word);
    CHECK(std::count(words.begin(), words.end(), "SUBJ") == 0);
    CHECK(std::count(words.begin(), words.end(), "OBJ") == 0);
    CHECK(std::count(words.begin(), words.end(), "he") == 2);  // text + anchor
    CHECK(std::count(words.begin(), words.end(), "corp") == 2);
}

TEST_CASE("verbalizer round-trips every symbol") {
    std::mt19937_64 rng(0);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 1 + static_cast<int>(bounded_index(rng, 12));
        std::vector<std::pair<std::string, WordEntry>> pairs;
        for (int i = 0; i < n; ++i)
            pairs.push_back({"sym" + std::to_string(i),
                             WordEntry{"word" + std::to_string(i), (i % 2) == 0}});
        Verbalizer v = Verbalizer::make(pairs);
        for (const auto& [symbol, word] : pairs) {
            CHECK(v.verbalize(symbol) == word);
            CHECK(v.unverbalize(word) == symbol);
        }
    }
}

TEST_CASE("verbalizer rejects non-injective maps and unknown lookups") {
    CHECK_THROWS_AS(Verbalizer::make({{"a", {"w", false}}, {"b", {"w", false}}}), cott::Error);
    Verbalizer v = domain_verbalizer();
    try {
        v.verbalize("Botany");
        FAIL_CHECK("expected UnknownSymbol");
    } catch (const Error& e) {
        CHECK(code_is(e, ErrorCode::UnknownSymbol));
    }
    try {
        v.unverbalize({"nope", false});
        FAIL_CHECK("expected UnknownWord");
    } catch (const Error& e) {
        CHECK(code_is(e, ErrorCode::UnknownWord));
    }
    // same word text under a different virtual flag is a distinct entry
    CHECK_NOTHROW(Verbalizer::make({{"a", {"w", false}}, {"b", {"w", true}}}));
}
