// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pruner/clustering.hpp"
#include "pruner/core.hpp"
#include "pruner/judge.hpp"
#include "pruner/sources.hpp"
#include "pruner/truncation.hpp"

namespace pruner {

struct RunOptions {
    std::size_t n_traces = 64;  // 0: every trace the source offers (replay)
    ReasoningLexicon lexicon = ReasoningLexicon::defaults();
    std::size_t parallelism = 1;
    bool evaluate_pass_at_k = true;
};

/// One line of the event log. `ts` is a logical clock: events are committed in
/// a fixed order so logs are reproducible. Only "paused" and "finished" carry
/// tokens_consumed; "evaluated" tokens belong to the pass@k bookkeeping.
struct Event {
    std::uint64_t ts = 0;
    std::string problem_id;
    TraceId trace_id;
    std::string event;
    std::uint64_t token_delta = 0;
};

nlohmann::json to_json(const Event& event);

struct ProblemRun {
    ProblemReport report;
    std::vector<Event> events;
    std::vector<AuditRecord> audit;
    std::vector<Trace> traces;  // arrival order; tokens hold the paused prefix only
};

ProblemRun run_problem(const Problem& problem, GenerationSource& source, const Judge& judge,
                       const PruneConfig& config, const RunOptions& options = {});

struct RunSinks {
    std::ostream* events = nullptr;  // JSONL event log
    std::ostream* audit = nullptr;   // JSONL clustering audit, one record per assignment
};

BenchmarkReport run_benchmark(std::span<const Problem> problems, GenerationSource& source, const Judge& judge,
                              const PruneConfig& config, const RunOptions& options = {},
                              std::optional<double> baseline_tokens = std::nullopt, RunSinks sinks = {});

/// Recomputes accuracy, totals and the optional ΔToken% from the per-problem
/// reports. Used by run_benchmark and report merging.
BenchmarkReport aggregate(std::vector<ProblemReport> problems, std::optional<double> baseline_tokens);

/// Runs fn(i) for i in [0, n) on at most `parallelism` threads. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t parallelism, const std::function<void(std::size_t)>& fn);

/// CSV summary, one row per problem followed by a TOTAL row.
void write_summary_csv(std::ostream& out, const BenchmarkReport& report);
inline constexpr const char* kSummaryCsvHeader =
    "problem_id,voted_answer,gold_answer,correct,tokens_consumed,judge_calls,judge_tokens,clusters,finishers,"
    "halted,pass_at_k,delta_token_pct";

}  // namespace pruner
