// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "pruner/clustering.hpp"
#include "pruner/core.hpp"
#include "pruner/rng.hpp"

namespace pruner {

/// Which traces get to finish. The first min(|c_max|, K2) members of the
/// largest cluster (ties: lowest index), unless every cluster is a singleton,
/// in which case min(K3, |candidates|) traces are drawn uniformly from
/// `candidates` (the non-halted traces, arrival order).
std::vector<TraceId> select_finishers(const ClusterState& state, std::span<const TraceId> candidates,
                                      const PruneConfig& config, Rng& rng);

struct VoteGroup {
    std::string answer;  // first occurrence, as given
    std::size_t count = 0;
};

struct VoteResult {
    std::string answer;
    std::size_t tally = 0;
    std::vector<VoteGroup> groups;  // first-occurrence order
};

/// Answers pool with the first representative of a group when answer_reward
/// says they match. The biggest group wins; ties go to the earliest group.
VoteResult majority_vote(std::span<const std::string> answers);

}  // namespace pruner
