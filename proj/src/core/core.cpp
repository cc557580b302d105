// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/core.hpp"

#include <cctype>
#include <cmath>

#include "pruner/errors.hpp"

namespace pruner {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::IllegalTransition: return "IllegalTransition";
        case ErrorKind::MissingGroundTruth: return "MissingGroundTruth";
        case ErrorKind::Transport: return "Transport";
        case ErrorKind::Timeout: return "Timeout";
        case ErrorKind::UnparseableVerdict: return "UnparseableVerdict";
        case ErrorKind::SingleClassDataset: return "SingleClassDataset";
        case ErrorKind::AlreadyTerminated: return "AlreadyTerminated";
        case ErrorKind::EmptyState: return "EmptyState";
        case ErrorKind::EmptyAnswerList: return "EmptyAnswerList";
        case ErrorKind::SourceExhausted: return "SourceExhausted";
        case ErrorKind::JudgeFailure: return "JudgeFailure";
        case ErrorKind::InvalidDistribution: return "InvalidDistribution";
        case ErrorKind::EmptyPairSet: return "EmptyPairSet";
        case ErrorKind::SingleClass: return "SingleClass";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::ZeroBaseline: return "ZeroBaseline";
        case ErrorKind::FileNotFound: return "FileNotFound";
        case ErrorKind::SchemaError: return "SchemaError";
    }
    return "Unknown";
}

Tokens tokenize(std::string_view text) {
    Tokens out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

std::string join_tokens(const Tokens& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::string_view to_string(TraceState state) noexcept {
    switch (state) {
        case TraceState::Generating: return "Generating";
        case TraceState::Paused: return "Paused";
        case TraceState::Resumed: return "Resumed";
        case TraceState::Halted: return "Halted";
        case TraceState::Finished: return "Finished";
    }
    return "Unknown";
}

bool transition_allowed(TraceState from, TraceState to) noexcept {
    switch (from) {
        case TraceState::Generating: return to == TraceState::Paused;
        case TraceState::Paused: return to == TraceState::Resumed || to == TraceState::Halted;
        case TraceState::Resumed: return to == TraceState::Finished;
        case TraceState::Halted:
        case TraceState::Finished: return false;
    }
    return false;
}

Trace transition(Trace trace, TraceState to, std::optional<std::string> final_answer) {
    if (!transition_allowed(trace.state, to)) {
        throw Error(ErrorKind::IllegalTransition,
                    std::string(to_string(trace.state)) + " -> " + std::string(to_string(to)));
    }
    if (to == TraceState::Finished) {
        if (!final_answer) throw Error(ErrorKind::InvalidArgument, "Finished requires a final answer");
        trace.final_answer = std::move(final_answer);
        if (trace.total_tokens < trace.prefix_len) trace.total_tokens = trace.prefix_len;
    } else if (final_answer) {
        throw Error(ErrorKind::InvalidArgument, "final answer only accompanies Finished");
    }
    trace.state = to;
    return trace;
}

void TracePair::validate() const {
    if (label != 0 && label != 1) throw Error(ErrorKind::SchemaError, "label must be 0 or 1");
    if (left.empty() || right.empty()) throw Error(ErrorKind::SchemaError, "pair segments must be non-empty");
}

JudgeScore::JudgeScore(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "judge score outside [0,1]: " + std::to_string(value));
    }
}

std::string_view to_string(TruncationKind kind) noexcept {
    return kind == TruncationKind::FixedTokens ? "tokens" : "reasoning";
}

TruncationKind truncation_kind_from_string(std::string_view name) {
    if (name == "tokens" || name == "fixed") return TruncationKind::FixedTokens;
    if (name == "reasoning" || name == "reasoning_words") return TruncationKind::ReasoningWords;
    throw Error(ErrorKind::InvalidArgument, "unknown truncation mode '" + std::string(name) + "'");
}

std::string_view to_string(SampleMode mode) noexcept {
    return mode == SampleMode::Random ? "random" : "earliest";
}

SampleMode sample_mode_from_string(std::string_view name) {
    if (name == "random") return SampleMode::Random;
    if (name == "earliest") return SampleMode::Earliest;
    throw Error(ErrorKind::InvalidArgument, "unknown sample mode '" + std::string(name) + "'");
}

void PruneConfig::validate() const {
    if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorKind::InvalidArgument, "tau must lie in [0,1]");
    if (max_clusters < 1 || reps_per_cluster < 1 || finish_budget < 1 || singleton_fallback < 1) {
        throw Error(ErrorKind::InvalidArgument, "K, K1, K2, K3 must be >= 1");
    }
    if (trunc_mode.k < 1) throw Error(ErrorKind::InvalidArgument, "truncation k must be >= 1");
    if (adaptive_threshold) {
        const auto& a = *adaptive_threshold;
        if (!(a.step >= 0.0) || !(a.cap >= 0.0 && a.cap <= 1.0)) {
            throw Error(ErrorKind::InvalidArgument, "adaptive threshold needs step >= 0 and cap in [0,1]");
        }
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const TruncationMode& mode) {
    j = nlohmann::json{{"kind", to_string(mode.kind)}, {"k", mode.k}};
}

void from_json(const nlohmann::json& j, TruncationMode& mode) {
    mode.kind = truncation_kind_from_string(j.at("kind").get<std::string>());
    mode.k = j.at("k").get<std::size_t>();
}

void to_json(nlohmann::json& j, const AdaptiveThreshold& a) {
    j = nlohmann::json{{"trigger_clusters", a.trigger_clusters}, {"step", a.step}, {"cap", a.cap}};
}

void from_json(const nlohmann::json& j, AdaptiveThreshold& a) {
    a = AdaptiveThreshold{};
    if (j.contains("trigger_clusters")) a.trigger_clusters = j["trigger_clusters"].get<std::size_t>();
    if (j.contains("step")) a.step = j["step"].get<double>();
    if (j.contains("cap")) a.cap = j["cap"].get<double>();
}

void to_json(nlohmann::json& j, const PruneConfig& c) {
    j = nlohmann::json{{"tau", c.tau},
                       {"K", c.max_clusters},
                       {"K1", c.reps_per_cluster},
                       {"K2", c.finish_budget},
                       {"K3", c.singleton_fallback},
                       {"trunc_mode", c.trunc_mode},
                       {"adaptive_threshold", nullptr},
                       {"rng_seed", c.rng_seed},
                       {"sample_mode", to_string(c.sample_mode)}};
    if (c.adaptive_threshold) j["adaptive_threshold"] = *c.adaptive_threshold;
}

void from_json(const nlohmann::json& j, PruneConfig& c) {
    c = PruneConfig{};
    if (j.contains("tau")) c.tau = j["tau"].get<double>();
    if (j.contains("K")) c.max_clusters = j["K"].get<std::size_t>();
    if (j.contains("K1")) c.reps_per_cluster = j["K1"].get<std::size_t>();
    if (j.contains("K2")) c.finish_budget = j["K2"].get<std::size_t>();
    if (j.contains("K3")) c.singleton_fallback = j["K3"].get<std::size_t>();
    if (j.contains("trunc_mode")) c.trunc_mode = j["trunc_mode"].get<TruncationMode>();
    if (j.contains("adaptive_threshold") && !j["adaptive_threshold"].is_null()) {
        c.adaptive_threshold = j["adaptive_threshold"].get<AdaptiveThreshold>();
    }
    if (j.contains("rng_seed")) c.rng_seed = j["rng_seed"].get<std::uint64_t>();
    if (j.contains("sample_mode")) c.sample_mode = sample_mode_from_string(j["sample_mode"].get<std::string>());
    c.validate();
}

namespace {

template <typename T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& value) {
    j[key] = value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}

template <typename T>
void get_optional(const nlohmann::json& j, const char* key, std::optional<T>& value) {
    if (j.contains(key) && !j[key].is_null()) value = j[key].get<T>();
    else value.reset();
}

}  // namespace

void to_json(nlohmann::json& j, const ProblemReport& r) {
    j = nlohmann::json{{"problem_id", r.problem_id},
                       {"tokens_consumed", r.tokens_consumed},
                       {"judge_calls", r.judge_calls},
                       {"judge_tokens", r.judge_tokens},
                       {"judge_failures", r.judge_failures},
                       {"cluster_sizes", r.cluster_sizes},
                       {"finishers", r.finishers},
                       {"halted", r.halted},
                       {"terminated", r.terminated},
                       {"effective_tau", r.effective_tau},
                       {"voted_answer", r.voted_answer},
                       {"vote_tally", r.vote_tally},
                       {"correct", r.correct},
                       {"eval_tokens", r.eval_tokens}};
    put_optional(j, "gold_answer", r.gold_answer);
    put_optional(j, "pass_at_k", r.pass_at_k);
    put_optional(j, "cons_tokens", r.cons_tokens);
}

void from_json(const nlohmann::json& j, ProblemReport& r) {
    r.problem_id = j.at("problem_id").get<std::string>();
    r.tokens_consumed = j.at("tokens_consumed").get<std::uint64_t>();
    r.judge_calls = j.value("judge_calls", std::uint64_t{0});
    r.judge_tokens = j.value("judge_tokens", std::uint64_t{0});
    r.judge_failures = j.value("judge_failures", std::uint64_t{0});
    r.cluster_sizes = j.value("cluster_sizes", std::vector<std::size_t>{});
    r.finishers = j.value("finishers", std::vector<TraceId>{});
    r.halted = j.value("halted", std::size_t{0});
    r.terminated = j.value("terminated", false);
    r.effective_tau = j.value("effective_tau", 0.0);
    r.voted_answer = j.at("voted_answer").get<std::string>();
    r.vote_tally = j.value("vote_tally", std::size_t{0});
    r.correct = j.at("correct").get<bool>();
    r.eval_tokens = j.value("eval_tokens", std::uint64_t{0});
    get_optional(j, "gold_answer", r.gold_answer);
    get_optional(j, "pass_at_k", r.pass_at_k);
    get_optional(j, "cons_tokens", r.cons_tokens);
}

void to_json(nlohmann::json& j, const BenchmarkReport& r) {
    j = nlohmann::json{{"problems", r.problems},
                       {"accuracy", r.accuracy},
                       {"total_tokens", r.total_tokens},
                       {"total_judge_calls", r.total_judge_calls},
                       {"total_judge_tokens", r.total_judge_tokens}};
    put_optional(j, "baseline_tokens", r.baseline_tokens);
    put_optional(j, "delta_token_pct", r.delta_token_pct);
    put_optional(j, "pass_at_k_rate", r.pass_at_k_rate);
}

void from_json(const nlohmann::json& j, BenchmarkReport& r) {
    r.problems = j.at("problems").get<std::vector<ProblemReport>>();
    r.accuracy = j.value("accuracy", 0.0);
    r.total_tokens = j.value("total_tokens", std::uint64_t{0});
    r.total_judge_calls = j.value("total_judge_calls", std::uint64_t{0});
    r.total_judge_tokens = j.value("total_judge_tokens", std::uint64_t{0});
    get_optional(j, "baseline_tokens", r.baseline_tokens);
    get_optional(j, "delta_token_pct", r.delta_token_pct);
    get_optional(j, "pass_at_k_rate", r.pass_at_k_rate);
}

}  // namespace pruner
