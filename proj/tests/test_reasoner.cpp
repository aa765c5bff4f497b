// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "cott/error.hpp"
#include "cott/reasoner.hpp"
#include "cott/rng.hpp"
#include "toy_backend.hpp"

using namespace cott;
using cott::testing::ToyBackend;

namespace {

Verbalizer symbols_named(const std::string& tag, int n) {
    std::vector<std::pair<std::string, WordEntry>> pairs;
    for (int i = 0; i < n; ++i) {
        std::string name = tag + std::to_string(i);
        pairs.push_back({name, WordEntry{"w:" + name, false}});
    }
    return Verbalizer::make(pairs);
}

PromptSpec toy_spec(int steps, int labels, int slots = 1) {
    PromptSpec spec;
    spec.tmpl = compile_template(slots == 1 ? "[T], the kind is [C], the target is [A]."
                                            : "[T], the SUBJ [C] is [A] of the OBJ [C].");
    for (int s = 0; s < slots; ++s)
        spec.step_verbalizers.push_back(symbols_named("s" + std::to_string(s) + "_", steps));
    spec.label_verbalizer = symbols_named("y", labels);
    return spec;
}

SlotDistribution make_dist(std::vector<std::string> symbols, std::vector<double> probs) {
    SlotDistribution dist;
    dist.symbols = std::move(symbols);
    dist.probs = Eigen::Map<Eigen::VectorXd>(probs.data(),
                                             static_cast<Eigen::Index>(probs.size()));
    return dist;
}

RenderInput text_of(const std::string& word) { return {{word}, {}}; }

}  // namespace

TEST_CASE("step_one with a single intermediate symbol has confidence exactly 1") {
    ToyBackend backend(0.6, 1.0, 0);
    PromptSpec spec = toy_spec(1, 3);
    StepOneResult one = step_one(backend, spec, text_of("anything"));
    CHECK(one.step_conf == 1.0);
    CHECK(one.step_pred == std::vector<std::string>{"s0_0"});
}

TEST_CASE("step_one produces normalized per-slot and parallel label distributions") {
    ToyBackend backend(0.87, 2.0, 1);
    PromptSpec spec = toy_spec(7, 14);
    StepOneResult one = step_one(backend, spec, text_of("rodents"));

    REQUIRE(one.step_dists.size() == 1);
    CHECK(one.step_dists[0].probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(one.label_dist.probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(one.step_conf == doctest::Approx(0.87));
    // argmax tuple matches the distribution's top entry
    int best = one.step_dists[0].argmax();
    CHECK(one.step_pred[0] == one.step_dists[0].symbols[best]);
    CHECK(one.label_pred == one.label_dist.symbols[one.label_dist.argmax()]);
    CHECK(one.answer_hidden.size() == backend.hidden_dim());
}

TEST_CASE("step_one multi-slot confidence is the product of slot confidences") {
    ToyBackend backend(0.8, 1.0, 2);
    PromptSpec spec = toy_spec(5, 4, 2);
    RenderInput input{{"he", "works"}, {{"SUBJ", {"he"}}, {"OBJ", {"works"}}}};
    StepOneResult one = step_one(backend, spec, input);
    REQUIRE(one.step_dists.size() == 2);
    CHECK(one.step_conf == doctest::Approx(0.8 * 0.8).epsilon(1e-12));
}

TEST_CASE("step_two yields a normalized distribution that depends on the injected step") {
    ToyBackend backend(0.5, 2.0, 3);
    PromptSpec spec = toy_spec(4, 6);
    StepTwoResult a = step_two(backend, spec, text_of("text"), {"s0_1"});
    StepTwoResult b = step_two(backend, spec, text_of("text"), {"s0_2"});
    CHECK(a.label_dist.probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((a.label_dist.probs - b.label_dist.probs).lpNorm<Eigen::Infinity>() > 1e-6);
}

TEST_CASE("step_two with one label is the point distribution") {
    ToyBackend backend(0.5, 2.0, 4);
    PromptSpec spec = toy_spec(3, 1);
    StepTwoResult two = step_two(backend, spec, text_of("x"), {"s0_0"});
    CHECK(two.label_dist.probs.size() == 1);
    CHECK(two.label_dist.probs(0) == 1.0);
}

TEST_CASE("counterfactual masking renormalizes exactly") {
    auto dists = std::vector<SlotDistribution>{make_dist({"a", "b", "c"}, {0.5, 0.3, 0.2})};
    std::vector<std::string> pred{"a"};
    CHECK(counterfactual_probability(dists, pred, {"a"}) == 0.0);
    CHECK(counterfactual_probability(dists, pred, {"b"}) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(counterfactual_probability(dists, pred, {"c"}) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("two symbols force the other one") {
    auto dists = std::vector<SlotDistribution>{make_dist({"a", "b"}, {0.9, 0.1})};
    std::mt19937_64 rng(0);
    for (int i = 0; i < 200; ++i)
        CHECK(sample_counterfactual(dists, {"a"}, rng) == std::vector<std::string>{"b"});
}

TEST_CASE("sampler never returns the prediction and matches the masked law") {
    auto dists = std::vector<SlotDistribution>{make_dist({"a", "b", "c"}, {0.5, 0.3, 0.2})};
    std::vector<std::string> pred{"a"};
    std::mt19937_64 rng(0);
    int countB = 0, countC = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        auto draw = sample_counterfactual(dists, pred, rng);
        CHECK(draw != pred);
        if (draw[0] == "b") ++countB;
        if (draw[0] == "c") ++countC;
    }
    double tv = 0.5 * (std::abs(countB / double(n) - 0.6) + std::abs(countC / double(n) - 0.4));
    CHECK(tv <= 0.02);
}

TEST_CASE("multi-slot sampler draws from the masked joint space") {
    std::vector<SlotDistribution> dists{make_dist({"a", "b"}, {0.7, 0.3}),
                                        make_dist({"x", "y"}, {0.6, 0.4})};
    std::vector<std::string> pred{"a", "x"};  // joint mass 0.42
    double total = 0.0;
    for (const auto& s0 : {"a", "b"})
        for (const auto& s1 : {"x", "y"})
            total += counterfactual_probability(dists, pred, {s0, s1});
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(counterfactual_probability(dists, pred, {"b", "y"}) ==
          doctest::Approx(0.3 * 0.4 / (1.0 - 0.42)).epsilon(1e-12));

    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) CHECK(sample_counterfactual(dists, pred, rng) != pred);
}

TEST_CASE("degenerate spaces raise NoCounterfactualAvailable") {
    auto one = std::vector<SlotDistribution>{make_dist({"only"}, {1.0})};
    std::mt19937_64 rng(0);
    try {
        sample_counterfactual(one, {"only"}, rng);
        FAIL_CHECK("expected NoCounterfactualAvailable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoCounterfactualAvailable);
    }
    // numerically exhausted mass on the prediction behaves the same way
    auto saturated = std::vector<SlotDistribution>{make_dist({"a", "b"}, {1.0, 0.0})};
    try {
        sample_counterfactual(saturated, {"a"}, rng);
        FAIL_CHECK("expected NoCounterfactualAvailable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoCounterfactualAvailable);
    }
}

TEST_CASE("rectify reproduces the published arithmetic") {
    SlotDistribution p1 = make_dist({"PCR", "Gene", "H/A"}, {0.64, 0.07, 0.04});
    SlotDistribution p2 = make_dist({"PCR", "Gene", "H/A"}, {0.04, 0.55, 0.30});
    SlotDistribution rect = rectify(0.52, p1, p2);
    // 0.52 * 0.04 + 0.48 * 0.64 = 0.328, printed as 0.33
    CHECK(rect.probs(0) == doctest::Approx(0.328).epsilon(1e-12));
    CHECK(std::abs(rect.probs(0) - 0.33) <= 0.005);

    SlotDistribution q1 = make_dist({"Gene", "PCR", "MB"}, {0.19, 0.25, 0.06});
    SlotDistribution q2 = make_dist({"Gene", "PCR", "MB"}, {0.54, 0.19, 0.15});
    SlotDistribution rect3 = rectify(0.53, q1, q2);
    // exact arithmetic on the printed two-decimal inputs; the printed outputs
    // are roundings of full-precision values, so compare at one final-digit ulp
    CHECK(rect3.probs(0) == doctest::Approx(0.3755).epsilon(1e-12));
    CHECK(rect3.probs(1) == doctest::Approx(0.2182).epsilon(1e-12));
    CHECK(rect3.probs(2) == doctest::Approx(0.1077).epsilon(1e-12));
    CHECK(std::abs(rect3.probs(0) - 0.37) < 0.01);
    CHECK(std::abs(rect3.probs(1) - 0.22) < 0.01);
    CHECK(std::abs(rect3.probs(2) - 0.11) < 0.01);
}

TEST_CASE("rectify endpoints, idempotence and bounds") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        int k = 2 + static_cast<int>(bounded_index(rng, 8));
        std::vector<std::string> symbols;
        std::vector<double> a(k), b(k);
        double sa = 0, sb = 0;
        for (int i = 0; i < k; ++i) {
            symbols.push_back("y" + std::to_string(i));
            a[i] = 0.01 + uniform_double(rng);
            b[i] = 0.01 + uniform_double(rng);
            sa += a[i];
            sb += b[i];
        }
        for (int i = 0; i < k; ++i) {
            a[i] /= sa;
            b[i] /= sb;
        }
        SlotDistribution p1 = make_dist(symbols, a);
        SlotDistribution p2 = make_dist(symbols, b);
        double conf = uniform_double(rng);
        SlotDistribution rect = rectify(conf, p1, p2);

        CHECK(rect.probs.sum() == doctest::Approx(1.0).epsilon(1e-6));
        for (int i = 0; i < k; ++i) {
            CHECK(rect.probs(i) >= std::min(a[i], b[i]) - 1e-12);
            CHECK(rect.probs(i) <= std::max(a[i], b[i]) + 1e-12);
        }
        CHECK((rectify(1.0, p1, p2).probs - p2.probs).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK((rectify(0.0, p1, p2).probs - p1.probs).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK((rectify(conf, p1, p1).probs - p1.probs).lpNorm<Eigen::Infinity>() < 1e-15);
    }
}

TEST_CASE("rectify argmax follows the dominant side at the endpoints") {
    SlotDistribution p1 = make_dist({"a", "b"}, {0.9, 0.1});
    SlotDistribution p2 = make_dist({"a", "b"}, {0.2, 0.8});
    CHECK(rectify(1.0, p1, p2).symbols[rectify(1.0, p1, p2).argmax()] == "b");
    CHECK(rectify(0.0, p1, p2).symbols[rectify(0.0, p1, p2).argmax()] == "a");
}

TEST_CASE("rectify rejects mismatched candidates and bad confidence") {
    SlotDistribution p1 = make_dist({"a", "b"}, {0.5, 0.5});
    SlotDistribution p2 = make_dist({"a", "c"}, {0.5, 0.5});
    try {
        rectify(0.5, p1, p2);
        FAIL_CHECK("expected CandidateMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CandidateMismatch);
    }
    SlotDistribution p3 = make_dist({"a", "b"}, {0.4, 0.6});
    CHECK_THROWS_AS(rectify(1.5, p1, p3), cott::Error);
}

TEST_CASE("predict assembles a consistent trace without a counterfactual") {
    ToyBackend backend(0.7, 2.0, 6);
    PromptSpec spec = toy_spec(5, 8);
    ReasoningTrace trace = predict(backend, spec, text_of("sample"), "id-1");

    CHECK(trace.id == "id-1");
    CHECK(trace.label_rectified.probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(trace.label_pred ==
          trace.label_rectified.symbols[trace.label_rectified.argmax()]);
    CHECK_FALSE(trace.hidden_counterfactual.has_value());
    CHECK_FALSE(trace.counterfactual_step.has_value());
    // the rectified vector is the stated convex combination
    Eigen::VectorXd expected = trace.step_conf * trace.label_step2.probs +
                               (1.0 - trace.step_conf) * trace.label_step1.probs;
    CHECK((trace.label_rectified.probs - expected).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("exact_total_probability equals step_two when the space is a single tuple") {
    ToyBackend backend(0.5, 2.0, 7);
    PromptSpec spec = toy_spec(1, 6);
    SlotDistribution exact = exact_total_probability(backend, spec, text_of("one"));
    StepTwoResult two = step_two(backend, spec, text_of("one"), {"s0_0"});
    CHECK((exact.probs - two.label_dist.probs).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("exact_total_probability is normalized for any model state") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ToyBackend backend(0.35, 3.0, seed);
        PromptSpec spec = toy_spec(7, 14);
        SlotDistribution exact =
            exact_total_probability(backend, spec, text_of("t" + std::to_string(seed)));
        CHECK(exact.probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(exact.probs.minCoeff() >= 0.0);
    }
}

TEST_CASE("enumeration guard rejects joint spaces beyond the limit") {
    ToyBackend backend(0.5, 1.0, 8);
    PromptSpec spec = toy_spec(40, 3, 2);  // 1600 tuples
    try {
        exact_total_probability(backend, spec, {{"a", "b"},
                                                {{"SUBJ", {"a"}}, {"OBJ", {"b"}}}});
        FAIL_CHECK("expected SpaceTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SpaceTooLarge);
    }
}

TEST_CASE("KL report excludes the prediction and handles identical distributions") {
    // sigma = 0 makes every label distribution uniform, so both divergences
    // vanish and the strict inequality is false everywhere
    ToyBackend uniform_backend(0.6, 0.0, 9);
    PromptSpec spec = toy_spec(4, 5);
    KlAssumptionReport report = kl_assumption_check(uniform_backend, spec, text_of("x"));
    CHECK(report.entries.size() == 3);  // |I| - 1
    for (const auto& entry : report.entries) {
        CHECK(entry.kl_vs_step1 == doctest::Approx(0.0));
        CHECK(entry.kl_vs_predicted == doctest::Approx(0.0));
        CHECK_FALSE(entry.holds);
    }
    CHECK(report.satisfaction_rate == 0.0);

    ToyBackend varied(0.6, 2.5, 10);
    KlAssumptionReport varied_report = kl_assumption_check(varied, spec, text_of("x"));
    CHECK(varied_report.entries.size() == 3);
    CHECK(varied_report.satisfaction_rate >= 0.0);
    CHECK(varied_report.satisfaction_rate <= 1.0);
    for (const auto& entry : varied_report.entries) {
        CHECK(entry.kl_vs_step1 >= 0.0);
        CHECK(entry.kl_vs_predicted >= 0.0);
    }
}

TEST_CASE("kl_divergence of a distribution with itself is zero") {
    Eigen::VectorXd p(3);
    p << 0.2, 0.5, 0.3;
    CHECK(kl_divergence(p, p) == 0.0);
    Eigen::VectorXd q(3);
    q << 0.6, 0.2, 0.2;
    CHECK(kl_divergence(p, q) > 0.0);
}
