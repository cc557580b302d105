// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <map>
#include <sstream>

#include "doctest.h"
#include "pruner/answer.hpp"
#include "pruner/errors.hpp"
#include "pruner/pipeline.hpp"
#include "testing.hpp"

using namespace pruner;

namespace {

SyntheticSpec single_answer_spec() {
    SyntheticSpec spec;
    spec.n_traces = 64;
    spec.answers = {{"42", 1.0}};
    spec.prefix_len = {500, 500};
    spec.total_len = {5000, 5000};
    spec.seed = 3;
    return spec;
}

std::vector<RecordedTrace> replay_16() {
    // Answer histogram 7 / 4 / 3 / 2, interleaved so the mode does not arrive first.
    const std::vector<std::string> answers{"3", "1/2", "7", "3", "x", "0.5", "3", "7", "3",
                                           "x", "3", "0.5", "7", "3", "1/2", "3"};
    std::vector<RecordedTrace> out;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        RecordedTrace t;
        t.problem_id = "p";
        t.trace_id = "r" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        for (std::size_t j = 0; j < 20 + i; ++j) t.tokens.push_back("w" + std::to_string(j));
        t.total_tokens = 100 + 10 * i;
        t.final_answer = answers[i];
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace

TEST_CASE("single-answer synthetic problem") {
    SyntheticSource source(single_answer_spec());
    PruneConfig config;
    const auto run = run_problem(Problem{"p0", "", "42"}, source, OracleJudge{}, config);
    const auto& r = run.report;
    CHECK(r.cluster_sizes == std::vector<std::size_t>{64});
    CHECK(r.finishers.size() == 10);
    CHECK(r.halted == 54);
    CHECK(r.voted_answer == "42");
    CHECK(r.vote_tally == 10);
    CHECK(r.correct);
    CHECK(r.tokens_consumed == 64 * 500 + 10 * (5000 - 500));
    CHECK(r.cons_tokens == 64u * 5000u);
    CHECK(r.pass_at_k == true);
    CHECK(r.eval_tokens == 0);
    // Every new trace is compared with min(10, |cluster|) members.
    std::uint64_t calls = 0;
    for (std::uint64_t i = 1; i < 64; ++i) calls += std::min<std::uint64_t>(10, i);
    CHECK(r.judge_calls == calls);
}

TEST_CASE("token accounting with varied lengths") {
    SyntheticSpec spec;
    spec.n_traces = 32;
    spec.answers = {{"1", 0.7}, {"2", 0.3}};
    spec.prefix_len = {100, 300};
    spec.total_len = {200, 3000};
    spec.seed = 8;
    SyntheticSource source(spec);
    PruneConfig config;
    config.trunc_mode = TruncationMode::fixed_tokens(400);
    const Problem problem{"pv", "", "1"};
    const auto run = run_problem(problem, source, OracleJudge{}, config, RunOptions{32});

    const auto traces = generate_synthetic(source.spec_for(problem, 32), "pv");
    std::map<std::string, std::size_t> total;
    for (const auto& t : traces) total[t.trace_id] = t.total_tokens;

    std::uint64_t expected = 0;
    for (const auto& t : traces) expected += std::min<std::size_t>(t.total_tokens, 400);
    for (const auto& id : run.report.finishers) expected += total[id] - std::min<std::size_t>(total[id], 400);
    CHECK(run.report.tokens_consumed == expected);

    // The event log carries the same ledger, and halted traces never generate past the pause.
    std::uint64_t from_events = 0;
    std::map<std::string, std::vector<std::string>> history;
    for (const auto& e : run.events) {
        history[e.trace_id].push_back(e.event);
        if (e.event == "paused" || e.event == "finished") from_events += e.token_delta;
        if (e.event == "halted") CHECK(e.token_delta == 0);
    }
    CHECK(from_events == expected);
    for (std::size_t i = 1; i < run.events.size(); ++i) CHECK(run.events[i].ts == run.events[i - 1].ts + 1);
    for (const auto& [id, h] : history) {
        REQUIRE(!h.empty());
        CHECK(h[0] == "paused");
        const bool halted = std::find(h.begin(), h.end(), "halted") != h.end();
        const bool finished = std::find(h.begin(), h.end(), "finished") != h.end();
        CHECK(halted != finished);
    }
    for (const auto& t : run.traces) {
        CHECK((t.state == TraceState::Halted || t.state == TraceState::Finished));
        CHECK(t.final_answer.has_value() == (t.state == TraceState::Finished));
        CHECK(t.prefix_len <= t.total_tokens);
    }

    // Arrival order: shorter prefixes first.
    for (std::size_t i = 1; i < run.traces.size(); ++i) CHECK(run.traces[i - 1].prefix_len <= run.traces[i].prefix_len);
}

TEST_CASE("one trace falls back to itself") {
    auto spec = single_answer_spec();
    spec.n_traces = 1;
    SyntheticSource source(spec);
    const auto run = run_problem(Problem{"p0", "", "42"}, source, OracleJudge{}, PruneConfig{}, RunOptions{1});
    CHECK(run.report.finishers == std::vector<TraceId>{"t0"});
    CHECK(run.report.voted_answer == "42");
    CHECK(run.report.judge_calls == 0);
    CHECK(run.report.tokens_consumed == 5000);
}

TEST_CASE("replayed traces vote for the modal answer") {
    ReplaySource source(replay_16());
    PruneConfig config;
    config.trunc_mode = TruncationMode::fixed_tokens(10);
    const auto run = run_problem(Problem{"p", "", "3"}, source, OracleJudge{}, config, RunOptions{0});
    CHECK(run.report.cluster_sizes.size() == 4);
    std::vector<std::size_t> sizes = run.report.cluster_sizes;
    std::sort(sizes.rbegin(), sizes.rend());
    CHECK(sizes == std::vector<std::size_t>{7, 4, 3, 2});
    std::vector<std::string> answers;
    for (const auto& t : replay_16()) answers.push_back(*t.final_answer);
    CHECK(answer_reward(run.report.voted_answer, testing::plurality(answers)) == 1);
    CHECK(run.report.correct);
    CHECK(run.report.pass_at_k == true);
    CHECK(run.report.eval_tokens > 0);
}

TEST_CASE("runs are deterministic and independent of parallelism") {
    SyntheticSpec spec;
    spec.n_traces = 48;
    spec.answers = {{"1", 0.5}, {"2", 0.3}, {"3", 0.2}};
    spec.total_len = {600, 2000};
    spec.prefix_len = {50, 200};
    SyntheticSource source(spec);
    const SimulatedJudge judge(0.87, 5);
    PruneConfig config;
    config.rng_seed = 17;
    const std::vector<Problem> problems{{"a", "", "1"}, {"b", "", "2"}};

    auto render = [&](std::size_t parallelism) {
        RunOptions opt;
        opt.n_traces = 48;
        opt.parallelism = parallelism;
        std::ostringstream events, audit;
        const auto report = run_benchmark(problems, source, judge, config, opt, std::nullopt, RunSinks{&events, &audit});
        nlohmann::json j = report;
        return j.dump() + events.str() + audit.str();
    };
    const auto one = render(1);
    CHECK(one == render(1));
    CHECK(one == render(4));
}

TEST_CASE("benchmark aggregation") {
    SyntheticSource source(single_answer_spec());
    std::vector<Problem> problems;
    for (int i = 0; i < 10; ++i) problems.push_back({"p" + std::to_string(i), "", "42"});
    const auto report = run_benchmark(problems, source, OracleJudge{}, PruneConfig{});
    CHECK(report.accuracy == 1.0);
    CHECK_FALSE(report.delta_token_pct);
    CHECK(report.total_tokens == 10u * 77000u);
    CHECK(report.pass_at_k_rate == 1.0);

    ProblemReport p;
    p.tokens_consumed = 42000000;
    const auto with_baseline = aggregate({p}, 3.62e8);
    REQUIRE(with_baseline.delta_token_pct);
    CHECK(std::abs(*with_baseline.delta_token_pct - (-88.4)) < 0.05);
    CHECK(with_baseline.accuracy == 0.0);

    std::ostringstream csv;
    write_summary_csv(csv, with_baseline);
    const auto text = csv.str();
    CHECK(text.rfind(std::string(kSummaryCsvHeader) + "\n", 0) == 0);
    CHECK(text.find("TOTAL,,,0.0000,42000000,") != std::string::npos);
    CHECK(text.substr(text.size() - 7) == ",-88.4\n");
}

TEST_CASE("wrong answers are scored as incorrect") {
    auto spec = single_answer_spec();
    SyntheticSource source(spec);
    const auto run = run_problem(Problem{"p0", "", "41"}, source, OracleJudge{}, PruneConfig{});
    CHECK_FALSE(run.report.correct);
    CHECK(run.report.pass_at_k == false);
    const auto no_gold = run_problem(Problem{"p0", "", std::nullopt}, source, OracleJudge{}, PruneConfig{});
    CHECK_FALSE(no_gold.report.correct);
    CHECK_FALSE(no_gold.report.pass_at_k);
}

TEST_CASE("parallel_for propagates the first failure") {
    std::atomic<int> ran{0};
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [&](std::size_t i) {
                                     ++ran;
                                     if (i == 5) throw Error(ErrorKind::JudgeFailure, "boom");
                                 }),
                    Error);
    std::vector<int> hit(50, 0);
    parallel_for(50, 8, [&](std::size_t i) { hit[i] = 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 50);
}

TEST_CASE("short sources are reported") {
    ReplaySource source(replay_16());
    RunOptions opt;
    opt.n_traces = 64;
    try {
        run_problem(Problem{"p", "", "3"}, source, OracleJudge{}, PruneConfig{}, opt);
        FAIL("expected SourceExhausted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SourceExhausted);
    }
}
