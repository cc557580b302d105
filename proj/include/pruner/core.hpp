// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace pruner {

using TraceId = std::string;
using Tokens = std::vector<std::string>;

/// Splits on ASCII whitespace. This is the default tokenizer; replay files may
/// carry an explicit token array instead.
Tokens tokenize(std::string_view text);
std::string join_tokens(const Tokens& tokens);

// ---------------------------------------------------------------------------
// Trace lifecycle
// ---------------------------------------------------------------------------

enum class TraceState { Generating, Paused, Resumed, Halted, Finished };

std::string_view to_string(TraceState state) noexcept;
bool transition_allowed(TraceState from, TraceState to) noexcept;

struct Trace {
    TraceId trace_id;
    std::string problem_id;
    Tokens tokens;
    std::size_t prefix_len = 0;
    TraceState state = TraceState::Generating;
    std::optional<std::string> final_answer;
    std::size_t total_tokens = 0;
};

/// Moves a trace along Generating -> Paused -> {Resumed -> Finished, Halted}.
/// Entering Finished requires the final answer; every other edge forbids one.
/// Throws Error(IllegalTransition) for edges outside that graph.
Trace transition(Trace trace, TraceState to, std::optional<std::string> final_answer = std::nullopt);

// ---------------------------------------------------------------------------
// Pairs, clusters, scores
// ---------------------------------------------------------------------------

struct TracePair {
    std::string problem_id;
    Tokens left;
    Tokens right;
    int label = 0;  // 1 = same final answer
    std::pair<TraceId, TraceId> source_trace_ids;

    void validate() const;
};

struct Cluster {
    std::size_t cluster_id = 0;
    std::vector<TraceId> members;  // insertion order
};

/// Probability in [0, 1] that two segments end in the same answer.
class JudgeScore {
public:
    explicit JudgeScore(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class TruncationKind { FixedTokens, ReasoningWords };

struct TruncationMode {
    TruncationKind kind = TruncationKind::FixedTokens;
    std::size_t k = 500;

    static TruncationMode fixed_tokens(std::size_t k = 500) { return {TruncationKind::FixedTokens, k}; }
    static TruncationMode reasoning_words(std::size_t k = 25) { return {TruncationKind::ReasoningWords, k}; }

    friend bool operator==(const TruncationMode&, const TruncationMode&) = default;
};

std::string_view to_string(TruncationKind kind) noexcept;
TruncationKind truncation_kind_from_string(std::string_view name);

struct AdaptiveThreshold {
    std::size_t trigger_clusters = 16;
    double step = 0.03;
    double cap = 0.9;

    friend bool operator==(const AdaptiveThreshold&, const AdaptiveThreshold&) = default;
};

/// How representatives of a cluster are picked for the similarity estimate.
enum class SampleMode { Random, Earliest };

std::string_view to_string(SampleMode mode) noexcept;
SampleMode sample_mode_from_string(std::string_view name);

struct PruneConfig {
    double tau = 0.5;
    std::size_t max_clusters = 32;       // K
    std::size_t reps_per_cluster = 10;   // K1
    std::size_t finish_budget = 10;      // K2
    std::size_t singleton_fallback = 64; // K3
    TruncationMode trunc_mode = TruncationMode::fixed_tokens();
    std::optional<AdaptiveThreshold> adaptive_threshold;
    std::uint64_t rng_seed = 0;
    SampleMode sample_mode = SampleMode::Random;

    void validate() const;

    friend bool operator==(const PruneConfig&, const PruneConfig&) = default;
};

void to_json(nlohmann::json& j, const TruncationMode& mode);
void from_json(const nlohmann::json& j, TruncationMode& mode);
void to_json(nlohmann::json& j, const AdaptiveThreshold& adaptive);
void from_json(const nlohmann::json& j, AdaptiveThreshold& adaptive);
void to_json(nlohmann::json& j, const PruneConfig& config);
void from_json(const nlohmann::json& j, PruneConfig& config);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ProblemReport {
    std::string problem_id;
    std::uint64_t tokens_consumed = 0;
    std::uint64_t judge_calls = 0;
    std::uint64_t judge_tokens = 0;  // never folded into tokens_consumed
    std::uint64_t judge_failures = 0;
    std::vector<std::size_t> cluster_sizes;
    std::vector<TraceId> finishers;
    std::size_t halted = 0;
    bool terminated = false;
    double effective_tau = 0.0;
    std::string voted_answer;
    std::size_t vote_tally = 0;
    std::optional<std::string> gold_answer;
    bool correct = false;
    std::optional<bool> pass_at_k;
    std::uint64_t eval_tokens = 0;  // representative resumption, evaluation only
    std::optional<std::uint64_t> cons_tokens;  // full-length total of all n traces, when known
};

struct BenchmarkReport {
    std::vector<ProblemReport> problems;
    double accuracy = 0.0;
    std::uint64_t total_tokens = 0;
    std::uint64_t total_judge_calls = 0;
    std::uint64_t total_judge_tokens = 0;
    std::optional<double> baseline_tokens;
    std::optional<double> delta_token_pct;
    std::optional<double> pass_at_k_rate;
};

void to_json(nlohmann::json& j, const ProblemReport& report);
void from_json(const nlohmann::json& j, ProblemReport& report);
void to_json(nlohmann::json& j, const BenchmarkReport& report);
void from_json(const nlohmann::json& j, BenchmarkReport& report);

}  // namespace pruner
