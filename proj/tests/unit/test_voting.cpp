// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "pruner/answer.hpp"
#include "pruner/errors.hpp"
#include "pruner/voting.hpp"
#include "testing.hpp"

using namespace pruner;

namespace {

ClusterState state_with_sizes(const std::vector<std::size_t>& sizes) {
    ClusterState s = ClusterState::initial(PruneConfig{});
    std::size_t next = 0;
    for (std::size_t ci = 0; ci < sizes.size(); ++ci) {
        Cluster c{ci, {}};
        for (std::size_t i = 0; i < sizes[ci]; ++i) c.members.push_back("t" + std::to_string(next++));
        s.clusters.push_back(std::move(c));
    }
    return s;
}

std::vector<TraceId> all_ids(const ClusterState& s) {
    std::vector<TraceId> out;
    for (const auto& c : s.clusters) out.insert(out.end(), c.members.begin(), c.members.end());
    return out;
}

}  // namespace

TEST_CASE("finishers come from the largest cluster") {
    const auto s = state_with_sizes({5, 3, 1});
    Rng rng(1);
    const auto f = select_finishers(s, all_ids(s), PruneConfig{}, rng);
    CHECK(f == std::vector<TraceId>{"t0", "t1", "t2", "t3", "t4"});
    CHECK(rng.draws() == 0);

    const auto big = state_with_sizes({2, 30});
    const auto g = select_finishers(big, all_ids(big), PruneConfig{}, rng);
    CHECK(g.size() == 10);
    CHECK(g.front() == "t2");
    CHECK(g.back() == "t11");

    const auto tie = state_with_sizes({1, 4, 4});
    CHECK(select_finishers(tie, all_ids(tie), PruneConfig{}, rng).front() == "t1");
}

TEST_CASE("all singletons fall back to a uniform sample") {
    const auto s = state_with_sizes(std::vector<std::size_t>(20, 1));
    const auto ids = all_ids(s);
    Rng rng(2);
    const auto f = select_finishers(s, ids, PruneConfig{}, rng);
    CHECK(f.size() == 20);
    CHECK(std::set<TraceId>(f.begin(), f.end()) == std::set<TraceId>(ids.begin(), ids.end()));

    PruneConfig small;
    small.singleton_fallback = 5;
    std::map<TraceId, int> counts;
    for (int trial = 0; trial < 4000; ++trial) {
        const auto pick = select_finishers(s, ids, small, rng);
        CHECK(pick.size() == 5);
        CHECK(std::set<TraceId>(pick.begin(), pick.end()).size() == 5);
        for (const auto& id : pick) ++counts[id];
    }
    // Each id expected 1000 times; binomial sd about 27.
    for (const auto& [id, n] : counts) CHECK(std::abs(n - 1000) < 130);
}

TEST_CASE("finisher selection needs clusters") {
    ClusterState empty = ClusterState::initial(PruneConfig{});
    Rng rng(3);
    try {
        select_finishers(empty, {}, PruneConfig{}, rng);
        FAIL("expected EmptyState");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyState);
    }
}

TEST_CASE("majority vote examples") {
    const std::vector<std::string> a{"0.5", "1/2", "2"};
    const auto r = majority_vote(a);
    CHECK(r.answer == "0.5");
    CHECK(r.tally == 2);
    CHECK(r.groups.size() == 2);

    const std::vector<std::string> tie{"B", "A", "A", "B"};
    CHECK(majority_vote(tie).answer == "B");
    const std::vector<std::string> one{"\\boxed{7}"};
    CHECK(majority_vote(one).answer == "\\boxed{7}");

    try {
        majority_vote(std::vector<std::string>{});
        FAIL("expected EmptyAnswerList");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyAnswerList);
    }
}

TEST_CASE("vote matches plurality over equivalence classes") {
    std::mt19937_64 gen(4);
    // Each form with a hand-assigned class; equal classes are equivalent answers.
    const std::vector<std::pair<std::string, std::string>> forms{
        {"1", "one"}, {"1.0", "one"}, {"2", "two"}, {"0.5", "half"}, {"1/2", "half"}, {"yes", "yes"}, {"Yes.", "yes"}, {"x", "x"}};
    std::map<std::string, std::string> class_of(forms.begin(), forms.end());
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> answers, classes;
        const std::size_t n = 1 + gen() % 40;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& f = forms[gen() % forms.size()];
            answers.push_back(f.first);
            classes.push_back(f.second);
        }
        const auto got = majority_vote(answers);
        CHECK(class_of.at(got.answer) == testing::plurality(classes));
        std::size_t total = 0;
        for (const auto& g : got.groups) total += g.count;
        CHECK(total == n);
    }
}
