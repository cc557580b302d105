// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pruner/core.hpp"
#include "pruner/sources.hpp"
#include "pruner/truncation.hpp"

namespace pruner {

/// One stored training pair. Unordered pairs are stored once with left_id <
/// right_id; segments are already truncated.
struct PairRecord {
    std::string problem_id;
    std::string model = "default";
    TraceId left_id;
    TraceId right_id;
    Tokens left_segment;
    Tokens right_segment;
    int label = 0;
    TruncationMode trunc_mode;
    std::optional<std::string> left_answer;
    std::optional<std::string> right_answer;

    TracePair to_trace_pair() const;
};

/// A trace takes part in pairing when it finished with an answer that is
/// non-empty after normalization and has at least one token.
bool has_valid_answer(const RecordedTrace& trace);

/// All C(n,2) pairs among the valid traces, which must share a problem (and
/// model). Pairs come out in (left, right) trace-id order.
std::vector<PairRecord> build_pairs(std::span<const RecordedTrace> traces, const TruncationMode& mode,
                                    const ReasoningLexicon& lexicon);

/// Groups a replay corpus by (model, problem) in first-appearance order and
/// pairs within each group.
std::vector<PairRecord> build_all_pairs(std::span<const RecordedTrace> traces, const TruncationMode& mode,
                                        const ReasoningLexicon& lexicon);

/// Fraction of label-1 pairs. Throws Error(EmptyPairSet) on an empty input.
double same_answer_ratio(std::span<const PairRecord> pairs);
double same_answer_ratio(std::span<const TracePair> pairs);

/// Seeded split by problem: whole problems go to one side. round(train_frac *
/// problems) problems land in train.
std::pair<std::vector<PairRecord>, std::vector<PairRecord>> split_dataset(std::span<const PairRecord> pairs,
                                                                          double train_frac, std::uint64_t seed);

struct PairStats {
    std::string model;
    std::uint64_t total = 0;
    std::uint64_t same = 0;
    double ratio() const;
};

/// Per-model counts in first-appearance order.
std::vector<PairStats> pair_stats(std::span<const PairRecord> pairs);
/// Pair-count-weighted combination: sums of totals and same-answer counts.
PairStats pooled_stats(std::span<const PairStats> stats, std::string name = "Average");
/// Model / Total Pairs / Same Answer Pairs / Similarity Ratio, then an Average row.
void print_pair_stats(std::ostream& out, std::span<const PairStats> stats);

nlohmann::json to_json(const PairRecord& pair);
PairRecord pair_record_from_json(const nlohmann::json& j);
void write_pairs(std::ostream& out, std::span<const PairRecord> pairs);
std::vector<PairRecord> load_pairs(const std::filesystem::path& path);

}  // namespace pruner
