// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations used by unit and acceptance tests. None
// of these call into the library under test.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace testing {

inline std::filesystem::path fixtures_dir() {
    if (const char* env = std::getenv("PRUNER_FIXTURES")) return env;
    return std::filesystem::path(__FILE__).parent_path() / "fixtures";
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("pruner_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// P(pos > neg) + 0.5 P(tie) by comparing every positive with every negative.
inline double auroc_all_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            total += 1.0;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / total;
}

struct TnrOracle {
    double tnr;
    double threshold;
};

/// Tries every observed score as a threshold t (score >= t predicts positive)
/// and keeps the best TNR with FNR <= cap; among equal TNR the largest t wins.
inline TnrOracle tnr_enumerate(const std::vector<double>& scores, const std::vector<int>& labels, double cap) {
    std::set<double> candidates(scores.begin(), scores.end());
    double pos = 0, neg = 0;
    for (int l : labels) (l == 1 ? pos : neg) += 1;
    TnrOracle best{-1.0, 0.0};
    for (double t : candidates) {
        double fn = 0, tn = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] < t) (labels[i] == 1 ? fn : tn) += 1;
        }
        if (fn / pos > cap) continue;
        const double tnr = tn / neg;
        if (tnr > best.tnr || (tnr == best.tnr && t > best.threshold)) best = {tnr, t};
    }
    return best;
}

/// Textbook focal loss on a probability, without logit tricks.
inline double focal_reference(double p, int label, double gamma, double alpha) {
    const double pt = label == 1 ? p : 1.0 - p;
    const double at = label == 1 ? alpha : 1.0 - alpha;
    return -at * std::pow(1.0 - pt, gamma) * std::log(pt);
}

inline double sigmoid_reference(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Answer that a plurality of `answers` agree on, first-seen on ties; exact
/// string comparison.
inline std::string plurality(const std::vector<std::string>& answers) {
    std::vector<std::pair<std::string, int>> counts;
    for (const auto& a : answers) {
        auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == a; });
        if (it == counts.end()) counts.emplace_back(a, 1);
        else ++it->second;
    }
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    return best->first;
}

/// Random scores on a coarse grid so ties show up often.
inline std::pair<std::vector<double>, std::vector<int>> random_scored_labels(std::mt19937_64& gen, std::size_t n,
                                                                            int grid) {
    std::uniform_int_distribution<int> level(0, grid);
    std::bernoulli_distribution coin(0.5);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = coin(gen) ? 1 : 0;
        scores[i] = static_cast<double>(level(gen)) / grid;
    }
    labels[0] = 1;
    labels[1] = 0;
    return {scores, labels};
}

}  // namespace testing
