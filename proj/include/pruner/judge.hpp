// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "pruner/core.hpp"

namespace pruner {

/// What a judge sees of one trace: its truncated tokens. Replay and synthetic
/// sources also attach the trace's eventual answer, which only the oracle and
/// simulated judges are allowed to read.
struct Segment {
    TraceId trace_id;
    Tokens tokens;
    std::optional<std::string> ground_truth;
};

struct Verdict {
    JudgeScore score;
    std::uint64_t tokens = 0;  // judge-side input cost of this call
};

/// Predicts whether two unfinished traces will reach the same final answer.
/// Implementations must be safe for concurrent calls and deterministic given
/// their own seed/state.
class Judge {
public:
    virtual ~Judge() = default;

    virtual Verdict judge(const Segment& left, const Segment& right) const = 0;
    virtual std::string_view name() const noexcept = 0;

    JudgeScore score(const Segment& left, const Segment& right) const { return judge(left, right).score; }

protected:
    static std::uint64_t concat_length(const Segment& left, const Segment& right) noexcept {
        return left.tokens.size() + right.tokens.size();
    }
};

/// Exact answer-equivalence of the ground-truth final answers.
class OracleJudge final : public Judge {
public:
    Verdict judge(const Segment& left, const Segment& right) const override;
    std::string_view name() const noexcept override { return "oracle"; }
};

JudgeScore oracle_score(const std::optional<std::string>& left_answer, const std::optional<std::string>& right_answer);

/// Ground truth blurred by a two-Beta noise model: same-answer pairs draw from
/// Beta(a,1), different-answer pairs from Beta(1,a). The shape `a` is chosen so
/// the population AUROC equals the requested target.
class SimulatedJudge final : public Judge {
public:
    SimulatedJudge(double target_auroc, std::uint64_t seed);

    Verdict judge(const Segment& left, const Segment& right) const override;
    std::string_view name() const noexcept override { return "simulated"; }

    double shape() const noexcept { return shape_; }
    double target_auroc() const noexcept { return target_; }

private:
    double target_;
    double shape_;  // +inf means noiseless
    std::uint64_t seed_;
};

/// Population AUROC of the two-Beta model with shape a: 1 - a * B(a+1, a).
double simulated_auroc_for_shape(double shape);
/// Inverts simulated_auroc_for_shape by bisection. 0.5 -> 1, 1.0 -> +inf.
double calibrate_simulated_shape(double target_auroc);

/// Order-independent identifier of a pair of traces.
std::uint64_t pair_key(std::string_view a, std::string_view b) noexcept;

/// One draw of the noise model for a pair, deterministic in (seed, pair_id).
JudgeScore simulated_score(int label, std::uint64_t seed, std::uint64_t pair_id, double shape);

}  // namespace pruner
