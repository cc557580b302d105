// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "pruner/errors.hpp"

namespace pruner {

ClusterState ClusterState::initial(const PruneConfig& config) {
    config.validate();
    ClusterState state;
    state.effective_tau = config.tau;
    state.rng = Rng(config.rng_seed);
    return state;
}

std::size_t ClusterState::assigned() const noexcept {
    std::size_t n = 0;
    for (const auto& c : clusters) n += c.members.size();
    return n;
}

std::string_view to_string(AssignDecision decision) noexcept {
    switch (decision) {
        case AssignDecision::Joined: return "joined";
        case AssignDecision::Opened: return "opened";
        case AssignDecision::Terminated: return "terminated";
    }
    return "unknown";
}

nlohmann::json to_json(const AuditRecord& r) {
    return nlohmann::json{{"trace_id", r.trace_id},
                          {"sims", r.sims},
                          {"decision", to_string(r.decision)},
                          {"cluster", r.cluster ? nlohmann::json(*r.cluster) : nlohmann::json(nullptr)},
                          {"effective_tau", r.effective_tau},
                          {"effective_tau_after", r.effective_tau_after},
                          {"rng_draws", r.rng_draws},
                          {"judge_calls", r.judge_calls}};
}

void write_audit_jsonl(std::ostream& out, std::span<const AuditRecord> records) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

namespace {

double judged_or_zero(const Segment& a, const Segment& b, const Judge& judge, JudgeUsage& usage) {
    ++usage.calls;
    try {
        const Verdict v = judge.judge(a, b);
        usage.tokens += v.tokens;
        return v.score.value();
    } catch (const Error& e) {
        switch (e.kind()) {
            case ErrorKind::Transport:
            case ErrorKind::Timeout:
            case ErrorKind::UnparseableVerdict:
            case ErrorKind::JudgeFailure:
                // Not-equivalent keeps the trace in its own cluster: diversity
                // over tokens.
                ++usage.failures;
                return 0.0;
            default:
                throw;
        }
    }
}

}  // namespace

double cluster_similarity(const Segment& segment, std::span<const SegmentPtr> members, const Judge& judge,
                          std::size_t reps_per_cluster, SampleMode mode, Rng& rng, JudgeUsage& usage) {
    if (members.empty()) throw Error(ErrorKind::InvalidArgument, "cluster has no members");
    const std::size_t n = members.size();
    const std::size_t p = std::min(reps_per_cluster, n);

    std::vector<std::size_t> picks(n);
    std::iota(picks.begin(), picks.end(), std::size_t{0});
    if (mode == SampleMode::Random && p < n) {
        // Partial Fisher-Yates: picks[0..p) is a uniform p-subset, in draw order.
        for (std::size_t i = 0; i < p; ++i) {
            std::swap(picks[i], picks[i + rng.uniform_index(n - i)]);
        }
    }

    double total = 0.0;
    for (std::size_t i = 0; i < p; ++i) total += judged_or_zero(segment, *members[picks[i]], judge, usage);
    return total / static_cast<double>(p);
}

AssignOutcome assign(ClusterState state, SegmentPtr segment, const Judge& judge, const PruneConfig& config) {
    if (state.terminated) throw Error(ErrorKind::AlreadyTerminated, "clustering already terminated");
    if (!segment) throw Error(ErrorKind::InvalidArgument, "null segment");

    AuditRecord audit;
    audit.trace_id = segment->trace_id;
    audit.effective_tau = state.effective_tau;
    const std::uint64_t draws_before = state.rng.draws();
    const std::uint64_t calls_before = state.usage.calls;

    audit.sims.reserve(state.clusters.size());
    for (const auto& members : state.member_segments) {
        audit.sims.push_back(cluster_similarity(*segment, members, judge, config.reps_per_cluster, config.sample_mode,
                                                state.rng, state.usage));
    }

    // max_element returns the first maximum, i.e. the lowest cluster index.
    const auto best = std::max_element(audit.sims.begin(), audit.sims.end());
    AssignDecision decision;
    if (best != audit.sims.end() && *best > state.effective_tau) {
        const auto idx = static_cast<std::size_t>(best - audit.sims.begin());
        state.clusters[idx].members.push_back(segment->trace_id);
        state.member_segments[idx].push_back(std::move(segment));
        audit.cluster = idx;
        decision = AssignDecision::Joined;
    } else if (state.clusters.size() < config.max_clusters) {
        const std::size_t idx = state.clusters.size();
        state.clusters.push_back(Cluster{idx, {segment->trace_id}});
        state.member_segments.push_back({std::move(segment)});
        audit.cluster = idx;
        decision = AssignDecision::Opened;
    } else {
        state.terminated = true;
        decision = AssignDecision::Terminated;
    }

    if (decision != AssignDecision::Terminated && config.adaptive_threshold) {
        const auto& a = *config.adaptive_threshold;
        if (state.clusters.size() > a.trigger_clusters && state.effective_tau < a.cap) {
            state.effective_tau = std::min(state.effective_tau + a.step, a.cap);
        }
    }

    audit.decision = decision;
    audit.effective_tau_after = state.effective_tau;
    audit.rng_draws = state.rng.draws() - draws_before;
    audit.judge_calls = state.usage.calls - calls_before;
    return AssignOutcome{std::move(state), decision, std::move(audit)};
}

ClusteringResult run_clustering(std::span<const SegmentPtr> segments, const Judge& judge, const PruneConfig& config) {
    ClusteringResult result{ClusterState::initial(config), {}, {}};
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (result.state.terminated) {
            result.halted.push_back(segments[i]->trace_id);
            continue;
        }
        auto outcome = assign(std::move(result.state), segments[i], judge, config);
        result.state = std::move(outcome.state);
        if (outcome.decision == AssignDecision::Terminated) result.halted.push_back(segments[i]->trace_id);
        result.audit.push_back(std::move(outcome.audit));
    }
    return result;
}

}  // namespace pruner
