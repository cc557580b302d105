// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "pruner/answer.hpp"
#include "pruner/errors.hpp"
#include "pruner/metrics.hpp"
#include "pruner/voting.hpp"

namespace pruner {

nlohmann::json to_json(const Event& e) {
    return nlohmann::json{{"ts", e.ts},
                          {"problem_id", e.problem_id},
                          {"trace_id", e.trace_id},
                          {"event", e.event},
                          {"token_delta", e.token_delta}};
}

void parallel_for(std::size_t n, std::size_t parallelism, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(std::max<std::size_t>(parallelism, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    pool.clear();
    if (error) std::rethrow_exception(error);
}

namespace {

struct Paused {
    std::size_t index = 0;  // position in the source's stream list
    Tokens prefix;
};

// Streams one trace to completion and returns how many tokens it emitted.
std::uint64_t drain(TraceStream& stream) {
    std::uint64_t emitted = 0;
    while (!stream.finished()) {
        const std::size_t got = stream.emit_until([](const std::string&) { return true; });
        emitted += got;
        if (got == 0 && !stream.finished()) {
            throw Error(ErrorKind::JudgeFailure, "trace '" + stream.trace_id() + "' stalled before completion");
        }
    }
    return emitted;
}

}  // namespace

ProblemRun run_problem(const Problem& problem, GenerationSource& source, const Judge& judge,
                       const PruneConfig& config, const RunOptions& options) {
    config.validate();
    auto streams = source.start(problem, options.n_traces);
    const std::size_t n = streams.size();

    // Phase 1: every trace generates up to its pause point.
    std::vector<Paused> paused(n);
    parallel_for(n, options.parallelism, [&](std::size_t i) {
        PauseDetector detector(config.trunc_mode, options.lexicon);
        Paused& p = paused[i];
        p.index = i;
        streams[i]->emit_until([&](const std::string& tok) {
            p.prefix.push_back(tok);
            return !detector.push(tok);
        });
    });

    // Pause-completion order: shorter prefixes pause first; ties by trace id.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (paused[a].prefix.size() != paused[b].prefix.size()) return paused[a].prefix.size() < paused[b].prefix.size();
        return streams[a]->trace_id() < streams[b]->trace_id();
    });

    ProblemRun run;
    run.report.problem_id = problem.problem_id;
    run.report.gold_answer = problem.gold_answer;
    std::uint64_t clock = 0;
    auto log = [&](const TraceId& id, std::string what, std::uint64_t delta) {
        run.events.push_back(Event{clock++, problem.problem_id, id, std::move(what), delta});
    };

    std::unordered_map<TraceId, std::size_t> slot;  // trace id -> index into run.traces
    std::vector<SegmentPtr> segments;
    segments.reserve(n);
    for (std::size_t i : order) {
        auto& stream = *streams[i];
        Trace t;
        t.trace_id = stream.trace_id();
        t.problem_id = problem.problem_id;
        t.prefix_len = paused[i].prefix.size();
        t.total_tokens = t.prefix_len;
        t.tokens = paused[i].prefix;
        t = transition(std::move(t), TraceState::Paused);
        run.report.tokens_consumed += t.prefix_len;
        log(t.trace_id, "paused", t.prefix_len);
        if (!slot.emplace(t.trace_id, run.traces.size()).second) {
            throw Error(ErrorKind::SchemaError, "duplicate trace id '" + t.trace_id + "' in problem '" +
                                                    problem.problem_id + "'");
        }
        segments.push_back(std::make_shared<const Segment>(Segment{t.trace_id, std::move(paused[i].prefix),
                                                                   stream.ground_truth()}));
        run.traces.push_back(std::move(t));
    }
    auto stream_of = [&](const TraceId& id) -> TraceStream& { return *streams[order[slot.at(id)]]; };

    // Phase 2: online clustering in arrival order.
    ClusteringResult clustering = run_clustering(segments, judge, config);
    run.audit = std::move(clustering.audit);
    const ClusterState& state = clustering.state;

    // Phase 3: pick finishers, halt everyone else.
    std::vector<TraceId> candidates;
    {
        std::unordered_map<TraceId, bool> halted_set;
        for (const auto& id : clustering.halted) halted_set[id] = true;
        for (const auto& t : run.traces) {
            if (!halted_set.contains(t.trace_id)) candidates.push_back(t.trace_id);
        }
    }
    Rng finisher_rng = state.rng;
    std::vector<TraceId> finishers = select_finishers(state, candidates, config, finisher_rng);

    std::vector<std::uint64_t> post_pause(finishers.size(), 0);
    parallel_for(finishers.size(), options.parallelism,
                 [&](std::size_t f) { post_pause[f] = drain(stream_of(finishers[f])); });

    std::unordered_map<TraceId, std::size_t> finisher_pos;
    for (std::size_t f = 0; f < finishers.size(); ++f) finisher_pos.emplace(finishers[f], f);

    std::vector<std::string> answers;
    for (auto& t : run.traces) {
        auto it = finisher_pos.find(t.trace_id);
        if (it == finisher_pos.end()) {
            t = transition(std::move(t), TraceState::Halted);
            log(t.trace_id, "halted", 0);
            continue;
        }
        const std::uint64_t delta = post_pause[it->second];
        t = transition(std::move(t), TraceState::Resumed);
        log(t.trace_id, "resumed", 0);
        t.total_tokens += delta;
        run.report.tokens_consumed += delta;
        auto answer = stream_of(t.trace_id).final_answer();
        t = transition(std::move(t), TraceState::Finished, answer.value_or(std::string{}));
        log(t.trace_id, "finished", delta);
    }
    // Votes follow finisher order, which fixes tie-breaking.
    for (const auto& id : finishers) {
        const auto& t = run.traces[slot.at(id)];
        if (t.final_answer && !t.final_answer->empty()) answers.push_back(*t.final_answer);
    }

    // Phase 4: vote and score.
    auto& rep = run.report;
    rep.finishers = finishers;
    rep.halted = n - finishers.size();
    rep.terminated = state.terminated;
    rep.effective_tau = state.effective_tau;
    rep.judge_calls = state.usage.calls;
    rep.judge_tokens = state.usage.tokens;
    rep.judge_failures = state.usage.failures;
    for (const auto& c : state.clusters) rep.cluster_sizes.push_back(c.members.size());
    if (!answers.empty()) {
        VoteResult vote = majority_vote(answers);
        rep.voted_answer = vote.answer;
        rep.vote_tally = vote.tally;
    }
    rep.correct = problem.gold_answer && !answers.empty() && answer_reward(rep.voted_answer, *problem.gold_answer) == 1;

    if (options.evaluate_pass_at_k && problem.gold_answer) {
        std::vector<std::string> rep_answers;
        for (const auto& c : state.clusters) {
            const TraceId& first = c.members.front();
            const auto& t = run.traces[slot.at(first)];
            if (!finisher_pos.contains(first)) {
                const std::uint64_t extra = drain(stream_of(first));
                rep.eval_tokens += extra;
                log(first, "evaluated", extra);
                if (auto a = stream_of(first).final_answer()) rep_answers.push_back(*a);
            } else if (t.final_answer && !t.final_answer->empty()) {
                rep_answers.push_back(*t.final_answer);
            }
        }
        rep.pass_at_k = pass_at_clusters(rep_answers, *problem.gold_answer);
    }

    std::uint64_t cons = 0;
    bool known = true;
    for (const auto& s : streams) {
        auto total = s->recorded_total();
        if (!total) {
            known = false;
            break;
        }
        cons += *total;
    }
    if (known) rep.cons_tokens = cons;
    return run;
}

BenchmarkReport aggregate(std::vector<ProblemReport> problems, std::optional<double> baseline_tokens) {
    BenchmarkReport out;
    out.problems = std::move(problems);
    std::size_t correct = 0;
    std::size_t pass_known = 0;
    std::size_t pass_hits = 0;
    for (const auto& p : out.problems) {
        correct += p.correct ? 1 : 0;
        out.total_tokens += p.tokens_consumed;
        out.total_judge_calls += p.judge_calls;
        out.total_judge_tokens += p.judge_tokens;
        if (p.pass_at_k) {
            ++pass_known;
            pass_hits += *p.pass_at_k ? 1 : 0;
        }
    }
    if (!out.problems.empty()) out.accuracy = static_cast<double>(correct) / static_cast<double>(out.problems.size());
    if (pass_known > 0) out.pass_at_k_rate = static_cast<double>(pass_hits) / static_cast<double>(pass_known);
    if (baseline_tokens) {
        out.baseline_tokens = baseline_tokens;
        out.delta_token_pct = delta_token_pct(static_cast<double>(out.total_tokens), *baseline_tokens);
    }
    return out;
}

BenchmarkReport run_benchmark(std::span<const Problem> problems, GenerationSource& source, const Judge& judge,
                              const PruneConfig& config, const RunOptions& options,
                              std::optional<double> baseline_tokens, RunSinks sinks) {
    std::vector<ProblemReport> reports;
    reports.reserve(problems.size());
    for (const auto& problem : problems) {
        ProblemRun run = run_problem(problem, source, judge, config, options);
        if (sinks.events) {
            for (const auto& e : run.events) *sinks.events << to_json(e).dump() << '\n';
        }
        if (sinks.audit) {
            for (const auto& a : run.audit) {
                nlohmann::json j = to_json(a);
                j["problem_id"] = problem.problem_id;
                *sinks.audit << j.dump() << '\n';
            }
        }
        reports.push_back(std::move(run.report));
    }
    return aggregate(std::move(reports), baseline_tokens);
}

namespace {

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

}  // namespace

void write_summary_csv(std::ostream& out, const BenchmarkReport& report) {
    out << kSummaryCsvHeader << '\n';
    for (const auto& p : report.problems) {
        out << csv_field(p.problem_id) << ',' << csv_field(p.voted_answer) << ','
            << csv_field(p.gold_answer.value_or("")) << ',' << (p.correct ? 1 : 0) << ',' << p.tokens_consumed << ','
            << p.judge_calls << ',' << p.judge_tokens << ',' << p.cluster_sizes.size() << ',' << p.finishers.size()
            << ',' << p.halted << ',' << (p.pass_at_k ? (*p.pass_at_k ? "1" : "0") : "") << ',';
        if (p.cons_tokens && *p.cons_tokens > 0) {
            out << fixed(delta_token_pct(static_cast<double>(p.tokens_consumed), static_cast<double>(*p.cons_tokens)), 1);
        }
        out << '\n';
    }
    std::size_t clusters = 0, finishers = 0, halted = 0;
    for (const auto& p : report.problems) {
        clusters += p.cluster_sizes.size();
        finishers += p.finishers.size();
        halted += p.halted;
    }
    out << "TOTAL,," << ',' << fixed(report.accuracy, 4) << ',' << report.total_tokens << ','
        << report.total_judge_calls << ',' << report.total_judge_tokens << ',' << clusters << ',' << finishers << ','
        << halted << ',' << (report.pass_at_k_rate ? fixed(*report.pass_at_k_rate, 4) : "") << ','
        << (report.delta_token_pct ? fixed(*report.delta_token_pct, 1) : "") << '\n';
}

}  // namespace pruner
