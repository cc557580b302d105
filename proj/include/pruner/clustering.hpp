// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pruner/core.hpp"
#include "pruner/judge.hpp"
#include "pruner/rng.hpp"

namespace pruner {

using SegmentPtr = std::shared_ptr<const Segment>;

struct JudgeUsage {
    std::uint64_t calls = 0;
    std::uint64_t tokens = 0;
    std::uint64_t failures = 0;  // remote failures scored as 0 after retries
};

/// Clusters of traces predicted to share a final answer, in creation order.
struct ClusterState {
    std::vector<Cluster> clusters;
    std::vector<std::vector<SegmentPtr>> member_segments;  // parallel to clusters
    bool terminated = false;
    double effective_tau = 0.5;
    Rng rng;
    JudgeUsage usage;

    static ClusterState initial(const PruneConfig& config);
    std::size_t assigned() const noexcept;
};

enum class AssignDecision { Joined, Opened, Terminated };

std::string_view to_string(AssignDecision decision) noexcept;

struct AuditRecord {
    TraceId trace_id;
    std::vector<double> sims;  // one per existing cluster, creation order
    AssignDecision decision = AssignDecision::Opened;
    std::optional<std::size_t> cluster;  // index joined or opened
    double effective_tau = 0.0;          // threshold the decision was made against
    double effective_tau_after = 0.0;
    std::uint64_t rng_draws = 0;
    std::uint64_t judge_calls = 0;
};

nlohmann::json to_json(const AuditRecord& record);
void write_audit_jsonl(std::ostream& out, std::span<const AuditRecord> records);

/// Mean judge score between `segment` and p = min(K1, |members|) members
/// sampled without replacement (or the earliest p in SampleMode::Earliest).
/// Judge transport failures count as 0 and are tallied in `usage`.
double cluster_similarity(const Segment& segment, std::span<const SegmentPtr> members, const Judge& judge,
                          std::size_t reps_per_cluster, SampleMode mode, Rng& rng, JudgeUsage& usage);

struct AssignOutcome {
    ClusterState state;
    AssignDecision decision;
    AuditRecord audit;
};

/// One greedy step: join the most similar cluster when its similarity exceeds
/// the effective threshold, else open a cluster while fewer than K exist, else
/// terminate. Throws Error(AlreadyTerminated) on a terminated state.
AssignOutcome assign(ClusterState state, SegmentPtr segment, const Judge& judge, const PruneConfig& config);

struct ClusteringResult {
    ClusterState state;
    std::vector<AuditRecord> audit;
    std::vector<TraceId> halted;  // the terminating trace and everything after it
};

/// Folds assign over segments in arrival order, stopping at termination.
ClusteringResult run_clustering(std::span<const SegmentPtr> segments, const Judge& judge, const PruneConfig& config);

}  // namespace pruner
