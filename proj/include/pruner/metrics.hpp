// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pruner {

// Conventions shared by every function here: label 1 (same final answer) is
// the positive class, and a score >= threshold predicts positive.

/// Mann-Whitney estimate of P(score_pos > score_neg) + 0.5 P(tie).
double auroc(std::span<const double> scores, std::span<const int> labels);

struct TnrAtFnr {
    double tnr = 0.0;
    double fnr = 0.0;
    double threshold = 0.0;
};

/// Step-function sweep over observed scores: the most permissive threshold
/// whose FNR stays within `fnr_cap`, with the TNR it achieves.
TnrAtFnr tnr_at_fnr(std::span<const double> scores, std::span<const int> labels, double fnr_cap = 0.2);

/// Same quantity read off the ROC curve with linear interpolation between
/// observed operating points; for plotting, not for pass/fail checks.
double tnr_at_fnr_interpolated(std::span<const double> scores, std::span<const int> labels, double fnr_cap = 0.2);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;  // +inf for the (0,0) anchor
};

/// Operating points from (0,0) to (1,1), one per distinct observed score.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);
double trapezoid_area(std::span<const RocPoint> curve);
void write_roc_csv(std::ostream& out, std::span<const RocPoint> curve);

/// Signed percentage change relative to the baseline; negative means savings.
double delta_token_pct(double tokens_pruned, double tokens_origin);

/// Cluster-level pass@k: any representative matches the gold answer.
bool pass_at_clusters(std::span<const std::string> representative_answers, std::string_view gold);

}  // namespace pruner
