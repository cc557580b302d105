// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>

#include "pruner/answer.hpp"
#include "pruner/errors.hpp"

namespace pruner {

namespace {

struct ClassCounts {
    std::size_t pos = 0;
    std::size_t neg = 0;
};

ClassCounts check_inputs(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    std::to_string(scores.size()) + " scores vs " + std::to_string(labels.size()) + " labels");
    }
    ClassCounts c;
    for (int l : labels) {
        if (l == 1) ++c.pos;
        else if (l == 0) ++c.neg;
        else throw Error(ErrorKind::InvalidArgument, "labels must be 0 or 1");
    }
    if (c.pos == 0 || c.neg == 0) throw Error(ErrorKind::SingleClass, "both classes must be present");
    return c;
}

std::vector<std::size_t> order_by_score(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    return order;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
    const ClassCounts counts = check_inputs(scores, labels);
    const auto order = order_by_score(scores);

    // Ranks are 1-based; doubled so tied groups get an integer mid-rank.
    std::uint64_t pos_rank_x2 = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const std::uint64_t mid_rank_x2 = static_cast<std::uint64_t>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] == 1) pos_rank_x2 += mid_rank_x2;
        }
        i = j;
    }
    const double p = static_cast<double>(counts.pos);
    const double n = static_cast<double>(counts.neg);
    const double u = static_cast<double>(pos_rank_x2) / 2.0 - p * (p + 1.0) / 2.0;
    return u / (p * n);
}

TnrAtFnr tnr_at_fnr(std::span<const double> scores, std::span<const int> labels, double fnr_cap) {
    const ClassCounts counts = check_inputs(scores, labels);
    if (!(fnr_cap >= 0.0 && fnr_cap <= 1.0)) throw Error(ErrorKind::InvalidArgument, "fnr_cap must lie in [0,1]");
    const auto order = order_by_score(scores);
    const double p = static_cast<double>(counts.pos);
    const double n = static_cast<double>(counts.neg);

    // Ascending sweep: at threshold t, everything strictly below t is
    // predicted negative. Both FN and TN grow with t.
    TnrAtFnr best{0.0, 0.0, scores[order.front()]};
    std::size_t below_pos = 0;
    std::size_t below_neg = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double t = scores[order[i]];
        const double fnr = static_cast<double>(below_pos) / p;
        if (fnr <= fnr_cap) {
            best = {static_cast<double>(below_neg) / n, fnr, t};
        } else {
            break;
        }
        while (i < order.size() && scores[order[i]] == t) {
            (labels[order[i]] == 1 ? below_pos : below_neg) += 1;
            ++i;
        }
    }
    return best;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    const ClassCounts counts = check_inputs(scores, labels);
    auto order = order_by_score(scores);
    std::reverse(order.begin(), order.end());
    const double p = static_cast<double>(counts.pos);
    const double n = static_cast<double>(counts.neg);

    std::vector<RocPoint> curve;
    curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double t = scores[order[i]];
        while (i < order.size() && scores[order[i]] == t) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        curve.push_back({static_cast<double>(fp) / n, static_cast<double>(tp) / p, t});
    }
    return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
    }
    return area;
}

double tnr_at_fnr_interpolated(std::span<const double> scores, std::span<const int> labels, double fnr_cap) {
    const auto curve = roc_curve(scores, labels);
    const double target_tpr = 1.0 - fnr_cap;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const RocPoint& a = curve[i - 1];
        const RocPoint& b = curve[i];
        if (b.tpr >= target_tpr) {
            if (b.tpr == a.tpr) return 1.0 - a.fpr;
            const double w = (target_tpr - a.tpr) / (b.tpr - a.tpr);
            return 1.0 - (a.fpr + w * (b.fpr - a.fpr));
        }
    }
    return 0.0;
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> curve) {
    out << "fpr,tpr,threshold\n";
    for (const auto& pt : curve) out << pt.fpr << ',' << pt.tpr << ',' << pt.threshold << '\n';
}

double delta_token_pct(double tokens_pruned, double tokens_origin) {
    if (!(tokens_origin > 0.0)) throw Error(ErrorKind::ZeroBaseline, "baseline token count must be positive");
    return (tokens_pruned - tokens_origin) / tokens_origin * 100.0;
}

bool pass_at_clusters(std::span<const std::string> representative_answers, std::string_view gold) {
    const NormalizedAnswer g = normalize_answer(gold);
    return std::any_of(representative_answers.begin(), representative_answers.end(),
                       [&](const std::string& a) { return answer_reward(normalize_answer(a), g) == 1; });
}

}  // namespace pruner
