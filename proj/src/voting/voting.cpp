// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/voting.hpp"

#include <algorithm>

#include "pruner/answer.hpp"
#include "pruner/errors.hpp"

namespace pruner {

std::vector<TraceId> select_finishers(const ClusterState& state, std::span<const TraceId> candidates,
                                      const PruneConfig& config, Rng& rng) {
    if (state.clusters.empty()) throw Error(ErrorKind::EmptyState, "no clusters to select finishers from");

    const bool all_singletons = std::all_of(state.clusters.begin(), state.clusters.end(),
                                            [](const Cluster& c) { return c.members.size() == 1; });
    if (all_singletons) {
        std::vector<TraceId> pool(candidates.begin(), candidates.end());
        const std::size_t k = std::min(config.singleton_fallback, pool.size());
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
        }
        pool.resize(k);
        return pool;
    }

    const auto largest = std::max_element(state.clusters.begin(), state.clusters.end(),
                                          [](const Cluster& a, const Cluster& b) {
                                              return a.members.size() < b.members.size();
                                          });
    const std::size_t k = std::min(largest->members.size(), config.finish_budget);
    return {largest->members.begin(), largest->members.begin() + static_cast<std::ptrdiff_t>(k)};
}

VoteResult majority_vote(std::span<const std::string> answers) {
    if (answers.empty()) throw Error(ErrorKind::EmptyAnswerList, "nothing to vote on");

    std::vector<NormalizedAnswer> reps;
    VoteResult result;
    for (const auto& raw : answers) {
        NormalizedAnswer n = normalize_answer(raw);
        auto it = std::find_if(reps.begin(), reps.end(),
                               [&](const NormalizedAnswer& r) { return answer_reward(r, n) == 1; });
        if (it == reps.end()) {
            reps.push_back(std::move(n));
            result.groups.push_back({raw, 1});
        } else {
            ++result.groups[static_cast<std::size_t>(it - reps.begin())].count;
        }
    }
    // First maximum wins, i.e. the earliest-occurring group on ties.
    const auto best = std::max_element(result.groups.begin(), result.groups.end(),
                                       [](const VoteGroup& a, const VoteGroup& b) { return a.count < b.count; });
    result.answer = best->answer;
    result.tally = best->count;
    return result;
}

}  // namespace pruner
