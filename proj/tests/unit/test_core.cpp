// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "pruner/core.hpp"
#include "pruner/errors.hpp"
#include "pruner/rng.hpp"

using namespace pruner;

TEST_CASE("tokenize splits on whitespace runs") {
    CHECK(tokenize("  a  b\tc\n d ") == Tokens{"a", "b", "c", "d"});
    CHECK(tokenize("").empty());
    CHECK(join_tokens({"x", "y"}) == "x y");
}

TEST_CASE("trace lifecycle follows the allowed edges") {
    Trace t;
    t.trace_id = "t0";
    t = transition(t, TraceState::Paused);
    CHECK(t.state == TraceState::Paused);

    SUBCASE("resume then finish with an answer") {
        Trace r = transition(t, TraceState::Resumed);
        Trace f = transition(r, TraceState::Finished, "42");
        CHECK(f.state == TraceState::Finished);
        CHECK(f.final_answer == "42");
        CHECK_THROWS_AS(transition(f, TraceState::Resumed), Error);
    }
    SUBCASE("halted is terminal") {
        Trace h = transition(t, TraceState::Halted);
        for (auto to : {TraceState::Generating, TraceState::Paused, TraceState::Resumed, TraceState::Finished}) {
            CHECK_FALSE(transition_allowed(TraceState::Halted, to));
        }
        try {
            transition(h, TraceState::Resumed);
            FAIL("expected IllegalTransition");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::IllegalTransition);
        }
    }
    SUBCASE("finish needs an answer and other edges refuse one") {
        Trace r = transition(t, TraceState::Resumed);
        CHECK_THROWS_AS(transition(r, TraceState::Finished), Error);
        CHECK_THROWS_AS(transition(t, TraceState::Halted, "x"), Error);
    }
    SUBCASE("generating cannot skip the pause") {
        Trace g;
        CHECK_THROWS_AS(transition(g, TraceState::Resumed), Error);
        CHECK_THROWS_AS(transition(g, TraceState::Finished, "1"), Error);
    }
}

TEST_CASE("judge scores must be probabilities") {
    CHECK(JudgeScore(0.0).value() == 0.0);
    CHECK(JudgeScore(1.0).value() == 1.0);
    CHECK_THROWS_AS(JudgeScore(1.5), Error);
    CHECK_THROWS_AS(JudgeScore(-0.1), Error);
    CHECK_THROWS_AS(JudgeScore(std::nan("")), Error);
}

TEST_CASE("default configuration matches the published hyperparameters") {
    PruneConfig c;
    CHECK(c.tau == 0.5);
    CHECK(c.max_clusters == 32);
    CHECK(c.reps_per_cluster == 10);
    CHECK(c.finish_budget == 10);
    CHECK(c.singleton_fallback == 64);
    CHECK(c.trunc_mode == TruncationMode::fixed_tokens(500));
    CHECK(TruncationMode::reasoning_words().k == 25);
    CHECK_FALSE(c.adaptive_threshold.has_value());
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("configuration validation rejects out-of-range values") {
    PruneConfig c;
    c.tau = 1.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = PruneConfig{};
    c.max_clusters = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = PruneConfig{};
    c.trunc_mode.k = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("configuration survives a JSON round trip") {
    PruneConfig c;
    c.tau = 0.7;
    c.max_clusters = 8;
    c.trunc_mode = TruncationMode::reasoning_words(30);
    c.adaptive_threshold = AdaptiveThreshold{};
    c.rng_seed = 99;
    c.sample_mode = SampleMode::Earliest;
    nlohmann::json j = c;
    CHECK(j.at("K") == 8);
    CHECK(j.get<PruneConfig>() == c);
}

TEST_CASE("reports survive a JSON round trip") {
    ProblemReport p;
    p.problem_id = "p1";
    p.tokens_consumed = 1234;
    p.cluster_sizes = {3, 1};
    p.finishers = {"t0", "t2"};
    p.voted_answer = "42";
    p.gold_answer = "42";
    p.correct = true;
    p.pass_at_k = true;
    p.cons_tokens = 9999;
    BenchmarkReport b;
    b.problems = {p};
    b.accuracy = 1.0;
    b.total_tokens = 1234;
    b.delta_token_pct = -50.0;
    b.baseline_tokens = 2468;
    nlohmann::json j = b;
    const auto back = j.get<BenchmarkReport>();
    CHECK(nlohmann::json(back) == j);
    CHECK(back.problems.at(0).cons_tokens == 9999u);
}

TEST_CASE("error messages carry the kind name") {
    Error e(ErrorKind::SchemaError, "bad line");
    CHECK(std::string(e.what()) == "SchemaError: bad line");
    CHECK(e.detail() == "bad line");
}

TEST_CASE("rng is reproducible and bounded") {
    Rng a(7), b(7), c(8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs = differs || x != c.next_u64();
    }
    CHECK(differs);
    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.uniform_index(7) < 7);
        const double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
