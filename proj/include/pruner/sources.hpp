// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pruner/core.hpp"
#include "pruner/remote.hpp"

namespace pruner {

struct Problem {
    std::string problem_id;
    std::string question;
    std::optional<std::string> gold_answer;
};

/// One complete trace as stored in a replay file.
struct RecordedTrace {
    std::string problem_id;
    TraceId trace_id;
    std::string model = "default";
    Tokens tokens;
    std::size_t total_tokens = 0;  // >= tokens.size(); the remainder is unrecorded text
    std::optional<std::string> final_answer;
};

/// Incremental token producer for one trace. emit_until hands tokens to the
/// callback one at a time and stops right after the callback returns false, or
/// when the trace completes. Each token is produced exactly once across calls.
class TraceStream {
public:
    virtual ~TraceStream() = default;

    virtual const TraceId& trace_id() const noexcept = 0;
    virtual std::size_t emit_until(const std::function<bool(const std::string&)>& on_token) = 0;
    virtual bool finished() const noexcept = 0;
    /// Valid once finished().
    virtual std::optional<std::string> final_answer() const = 0;

    /// The eventual answer when the source already knows it (replay,
    /// synthetic). Only oracle-style judges consume this.
    virtual std::optional<std::string> ground_truth() const { return std::nullopt; }
    /// Full-length token count when known in advance.
    virtual std::optional<std::uint64_t> recorded_total() const { return std::nullopt; }
};

class GenerationSource {
public:
    virtual ~GenerationSource() = default;
    /// Starts n traces for a problem. Throws Error(SourceExhausted) when the
    /// source cannot supply that many.
    virtual std::vector<std::unique_ptr<TraceStream>> start(const Problem& problem, std::size_t n) = 0;
};

/// Replays recorded traces verbatim; past the recorded tokens it emits
/// placeholder tokens up to total_tokens.
class RecordedStream final : public TraceStream {
public:
    explicit RecordedStream(std::shared_ptr<const RecordedTrace> trace);

    const TraceId& trace_id() const noexcept override { return trace_->trace_id; }
    std::size_t emit_until(const std::function<bool(const std::string&)>& on_token) override;
    bool finished() const noexcept override { return cursor_ >= trace_->total_tokens; }
    std::optional<std::string> final_answer() const override;
    std::optional<std::string> ground_truth() const override { return trace_->final_answer; }
    std::optional<std::uint64_t> recorded_total() const override { return trace_->total_tokens; }

private:
    std::shared_ptr<const RecordedTrace> trace_;
    std::size_t cursor_ = 0;
};

inline constexpr std::string_view kUnrecordedToken = "<unrecorded>";

class ReplaySource final : public GenerationSource {
public:
    explicit ReplaySource(std::vector<RecordedTrace> traces);

    /// n == 0 replays every recorded trace of the problem, in file order.
    std::vector<std::unique_ptr<TraceStream>> start(const Problem& problem, std::size_t n) override;

    const std::map<std::string, std::vector<std::shared_ptr<const RecordedTrace>>>& by_problem() const noexcept {
        return by_problem_;
    }

private:
    std::map<std::string, std::vector<std::shared_ptr<const RecordedTrace>>> by_problem_;
};

// ---------------------------------------------------------------------------
// Synthetic traces
// ---------------------------------------------------------------------------

struct IntRange {
    std::size_t min = 0;
    std::size_t max = 0;  // inclusive
};

/// Desk-scale stand-in for benchmark traces. Each trace draws its answer from
/// `answers`, an opening section length from `prefix_len` and a total length
/// from `total_len` (lifted to at least the opening length). Tokens are filler
/// words interleaved with reasoning markers; in the opening section some
/// filler comes from an answer-specific vocabulary and some tokens restate the
/// answer, so shallow judges have a signal to learn.
struct SyntheticSpec {
    std::size_t n_traces = 64;
    std::vector<std::pair<std::string, double>> answers{{"42", 1.0}};
    IntRange prefix_len{500, 500};
    IntRange total_len{5000, 5000};
    double reasoning_word_rate = 0.05;
    double topic_rate = 0.3;
    double hint_rate = 0.02;
    std::uint64_t seed = 0;

    void validate() const;
};

std::vector<RecordedTrace> generate_synthetic(const SyntheticSpec& spec, std::string_view problem_id = "p0");

/// Generates a fresh synthetic trace set per problem; the per-problem seed mixes
/// the spec seed with the problem id.
class SyntheticSource final : public GenerationSource {
public:
    explicit SyntheticSource(SyntheticSpec spec);
    std::vector<std::unique_ptr<TraceStream>> start(const Problem& problem, std::size_t n) override;

    SyntheticSpec spec_for(const Problem& problem, std::size_t n) const;

private:
    SyntheticSpec spec_;
};

// ---------------------------------------------------------------------------
// Live generation over an OpenAI-compatible streaming endpoint
// ---------------------------------------------------------------------------

struct RemoteSourceOptions {
    EndpointConfig endpoint;
    double temperature = 0.6;
    std::size_t max_tokens = 32768;
};

/// Pausing closes the HTTP stream; resuming sends a new request whose last
/// message is the assistant prefix so far. Only newly emitted tokens count.
class RemoteSource final : public GenerationSource {
public:
    explicit RemoteSource(RemoteSourceOptions options);
    std::vector<std::unique_ptr<TraceStream>> start(const Problem& problem, std::size_t n) override;

private:
    RemoteSourceOptions options_;
    std::shared_ptr<ChatClient> client_;
};

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// Replay JSONL: {problem_id, trace_id, tokens:[...] | text, total_tokens?,
/// final_answer?, model?}. Errors name the offending line.
std::vector<RecordedTrace> load_replay(const std::filesystem::path& path);
std::vector<Problem> load_problems(const std::filesystem::path& path);
void write_replay(std::ostream& out, const std::vector<RecordedTrace>& traces);
void write_problems(std::ostream& out, const std::vector<Problem>& problems);

RecordedTrace recorded_trace_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RecordedTrace& trace);

}  // namespace pruner
