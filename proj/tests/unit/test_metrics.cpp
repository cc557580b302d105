// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "pruner/errors.hpp"
#include "pruner/metrics.hpp"
#include "testing.hpp"

using namespace pruner;

namespace {

std::pair<std::vector<double>, std::vector<int>> split(const std::vector<double>& pos, const std::vector<double>& neg) {
    std::vector<double> s(pos);
    s.insert(s.end(), neg.begin(), neg.end());
    std::vector<int> l(pos.size(), 1);
    l.insert(l.end(), neg.size(), 0);
    return {s, l};
}

}  // namespace

TEST_CASE("auroc examples") {
    auto [s1, l1] = split({0.9, 0.8}, {0.1, 0.2});
    CHECK(auroc(s1, l1) == 1.0);
    auto [s2, l2] = split({0.9, 0.8}, {0.7, 0.95});
    CHECK(auroc(s2, l2) == 0.5);
    auto [s3, l3] = split({0.2, 0.8}, {0.8, 0.2});
    CHECK(auroc(s3, l3) == 0.5);
}

TEST_CASE("auroc errors") {
    const std::vector<double> s{0.1, 0.2};
    try {
        auroc(s, std::vector<int>{1, 1});
        FAIL("expected SingleClass");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SingleClass);
    }
    try {
        auroc(s, std::vector<int>{1});
        FAIL("expected LengthMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LengthMismatch);
    }
}

TEST_CASE("auroc matches the all-pairs oracle and flips under negation") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto [s, l] = testing::random_scored_labels(gen, 2 + gen() % 150, 1 + static_cast<int>(gen() % 20));
        CHECK(std::abs(auroc(s, l) - testing::auroc_all_pairs(s, l)) < 1e-9);
        CHECK(std::abs(trapezoid_area(roc_curve(s, l)) - auroc(s, l)) < 1e-12);
        std::vector<double> neg(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) neg[i] = -s[i];
        CHECK(std::abs(auroc(neg, l) - (1.0 - auroc(s, l))) < 1e-12);
    }
}

TEST_CASE("tnr at fnr examples") {
    auto [s1, l1] = split({0.9, 0.8}, {0.1, 0.2});
    CHECK(tnr_at_fnr(s1, l1).tnr == 1.0);

    const std::vector<double> same(6, 0.4);
    const std::vector<int> labels{1, 1, 1, 0, 0, 0};
    CHECK(tnr_at_fnr(same, labels, 0.2).tnr == 0.0);

    // pos [.9,.8,.3], neg [.7,.2], cap .34: thresholds .7 and .8 both give
    // FNR 1/3; .8 also puts .7 below, so the best TNR is 1.
    auto [s3, l3] = split({0.9, 0.8, 0.3}, {0.7, 0.2});
    const auto r = tnr_at_fnr(s3, l3, 0.34);
    CHECK(r.tnr == 1.0);
    CHECK(r.threshold == 0.8);
    CHECK(r.fnr == doctest::Approx(1.0 / 3.0));
    const auto strict = tnr_at_fnr(s3, l3, 0.3);
    CHECK(strict.tnr == 0.5);
    CHECK(strict.threshold == 0.3);
}

TEST_CASE("tnr at fnr matches threshold enumeration") {
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 100; ++trial) {
        auto [s, l] = testing::random_scored_labels(gen, 2 + gen() % 100, 1 + static_cast<int>(gen() % 15));
        const double cap = static_cast<double>(gen() % 101) / 100.0;
        const auto got = tnr_at_fnr(s, l, cap);
        const auto want = testing::tnr_enumerate(s, l, cap);
        CHECK(got.tnr == want.tnr);
        CHECK(got.threshold == want.threshold);
    }
}

TEST_CASE("interpolated tnr is at least the step value") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto [s, l] = testing::random_scored_labels(gen, 20 + gen() % 100, 50);
        CHECK(tnr_at_fnr_interpolated(s, l, 0.2) >= tnr_at_fnr(s, l, 0.2).tnr - 1e-12);
    }
}

TEST_CASE("roc curve shape") {
    auto [s, l] = split({0.9, 0.8}, {0.1, 0.2});
    const auto perfect = roc_curve(s, l);
    bool through_corner = false;
    for (const auto& p : perfect) through_corner = through_corner || (p.fpr == 0.0 && p.tpr == 1.0);
    CHECK(through_corner);
    CHECK(perfect.front().fpr == 0.0);
    CHECK(perfect.back().fpr == 1.0);
    CHECK(perfect.back().tpr == 1.0);

    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> scores(1000);
    std::vector<int> labels(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        scores[i] = u(gen);
        labels[i] = u(gen) < 0.5 ? 1 : 0;
    }
    const auto curve = roc_curve(scores, labels);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].fpr >= curve[i - 1].fpr);
        CHECK(curve[i].tpr >= curve[i - 1].tpr);
        CHECK(curve[i].threshold < curve[i - 1].threshold);
    }

    std::ostringstream csv;
    write_roc_csv(csv, perfect);
    CHECK(csv.str().rfind("fpr,tpr,threshold\n", 0) == 0);
}

TEST_CASE("delta token percentage") {
    CHECK(std::abs(delta_token_pct(0.42e8, 3.62e8) - (-88.4)) < 0.05);
    CHECK(std::abs(delta_token_pct(0.42e8, 3.62e8) - (-88.3)) <= 0.2);
    CHECK(delta_token_pct(5, 5) == 0.0);
    CHECK(std::abs(delta_token_pct(0.23e8, 2.64e8) - (-91.4)) <= 0.2);
    for (double r : {0.0, 0.25, 0.5, 0.75, 1.0}) CHECK(delta_token_pct(1024.0 * (1 - r), 1024.0) == -100.0 * r);
    CHECK_THROWS_AS(delta_token_pct(1, 0), Error);
}

TEST_CASE("pass at clusters") {
    const std::vector<std::string> ab{"A", "B"};
    CHECK(pass_at_clusters(ab, "B"));
    CHECK_FALSE(pass_at_clusters(std::vector<std::string>{"A"}, "B"));
    CHECK(pass_at_clusters(std::vector<std::string>{"0.5"}, "1/2"));
}
