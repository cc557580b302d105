// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/judge.hpp"

#include <cmath>
#include <limits>

#include "pruner/answer.hpp"
#include "pruner/errors.hpp"
#include "pruner/rng.hpp"

namespace pruner {

JudgeScore oracle_score(const std::optional<std::string>& left_answer,
                        const std::optional<std::string>& right_answer) {
    if (!left_answer || !right_answer) {
        throw Error(ErrorKind::MissingGroundTruth, "oracle judge needs both final answers");
    }
    return JudgeScore(answer_reward(*left_answer, *right_answer) == 1 ? 1.0 : 0.0);
}

Verdict OracleJudge::judge(const Segment& left, const Segment& right) const {
    return {oracle_score(left.ground_truth, right.ground_truth), concat_length(left, right)};
}

double simulated_auroc_for_shape(double a) {
    if (std::isinf(a)) return 1.0;
    // a * B(a+1, a) via log-gamma to stay finite for large shapes.
    const double log_beta = std::lgamma(a + 1.0) + std::lgamma(a) - std::lgamma(2.0 * a + 1.0);
    return 1.0 - a * std::exp(log_beta);
}

double calibrate_simulated_shape(double target) {
    if (!(target >= 0.5 && target <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "target AUROC must lie in [0.5, 1]");
    }
    if (target == 1.0) return std::numeric_limits<double>::infinity();
    if (target == 0.5) return 1.0;
    double lo = 1.0;
    double hi = 2.0;
    while (simulated_auroc_for_shape(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) return std::numeric_limits<double>::infinity();
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (simulated_auroc_for_shape(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::uint64_t pair_key(std::string_view a, std::string_view b) noexcept {
    if (b < a) std::swap(a, b);
    return mix_seed(fnv1a64(a), fnv1a64(b) ^ 0x5bd1e995ULL);
}

JudgeScore simulated_score(int label, std::uint64_t seed, std::uint64_t pair_id, double shape) {
    if (std::isinf(shape)) return JudgeScore(label == 1 ? 1.0 : 0.0);
    Rng rng(mix_seed(seed, pair_id));
    // Inverse CDF: Beta(a,1) has F(x) = x^a.
    const double x = std::pow(rng.uniform_open01(), 1.0 / shape);
    return JudgeScore(label == 1 ? x : 1.0 - x);
}

SimulatedJudge::SimulatedJudge(double target_auroc, std::uint64_t seed)
    : target_(target_auroc), shape_(calibrate_simulated_shape(target_auroc)), seed_(seed) {}

Verdict SimulatedJudge::judge(const Segment& left, const Segment& right) const {
    const int label = oracle_score(left.ground_truth, right.ground_truth).value() == 1.0 ? 1 : 0;
    return {simulated_score(label, seed_, pair_key(left.trace_id, right.trace_id), shape_),
            concat_length(left, right)};
}

}  // namespace pruner
