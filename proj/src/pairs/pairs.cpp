// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>

#include "pruner/answer.hpp"
#include "pruner/errors.hpp"
#include "pruner/jsonl.hpp"
#include "pruner/rng.hpp"

namespace pruner {

TracePair PairRecord::to_trace_pair() const {
    return TracePair{problem_id, left_segment, right_segment, label, {left_id, right_id}};
}

bool has_valid_answer(const RecordedTrace& trace) {
    if (trace.tokens.empty() || !trace.final_answer) return false;
    return !normalize_answer(*trace.final_answer).canonical.empty();
}

std::vector<PairRecord> build_pairs(std::span<const RecordedTrace> traces, const TruncationMode& mode,
                                    const ReasoningLexicon& lexicon) {
    std::vector<const RecordedTrace*> valid;
    for (const auto& t : traces) {
        if (has_valid_answer(t)) valid.push_back(&t);
    }
    std::sort(valid.begin(), valid.end(),
              [](const RecordedTrace* a, const RecordedTrace* b) { return a->trace_id < b->trace_id; });

    std::vector<NormalizedAnswer> answers;
    std::vector<Tokens> segments;
    for (const auto* t : valid) {
        answers.push_back(normalize_answer(*t->final_answer));
        segments.push_back(truncate(t->tokens, mode, lexicon));
    }

    std::vector<PairRecord> out;
    out.reserve(valid.size() * (valid.size() - std::min<std::size_t>(valid.size(), 1)) / 2);
    for (std::size_t i = 0; i < valid.size(); ++i) {
        for (std::size_t j = i + 1; j < valid.size(); ++j) {
            PairRecord p;
            p.problem_id = valid[i]->problem_id;
            p.model = valid[i]->model;
            p.left_id = valid[i]->trace_id;
            p.right_id = valid[j]->trace_id;
            p.left_segment = segments[i];
            p.right_segment = segments[j];
            p.label = answer_reward(answers[i], answers[j]);
            p.trunc_mode = mode;
            p.left_answer = valid[i]->final_answer;
            p.right_answer = valid[j]->final_answer;
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<PairRecord> build_all_pairs(std::span<const RecordedTrace> traces, const TruncationMode& mode,
                                        const ReasoningLexicon& lexicon) {
    std::vector<std::pair<std::string, std::string>> keys;
    std::map<std::pair<std::string, std::string>, std::vector<RecordedTrace>> groups;
    for (const auto& t : traces) {
        auto key = std::make_pair(t.model, t.problem_id);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) keys.push_back(key);
        it->second.push_back(t);
    }
    std::vector<PairRecord> out;
    for (const auto& key : keys) {
        auto pairs = build_pairs(groups[key], mode, lexicon);
        std::move(pairs.begin(), pairs.end(), std::back_inserter(out));
    }
    return out;
}

namespace {

template <class Pair>
double ratio_of(std::span<const Pair> pairs) {
    if (pairs.empty()) throw Error(ErrorKind::EmptyPairSet, "no pairs");
    std::size_t same = 0;
    for (const auto& p : pairs) same += p.label == 1 ? 1 : 0;
    return static_cast<double>(same) / static_cast<double>(pairs.size());
}

}  // namespace

double same_answer_ratio(std::span<const PairRecord> pairs) { return ratio_of(pairs); }
double same_answer_ratio(std::span<const TracePair> pairs) { return ratio_of(pairs); }

std::pair<std::vector<PairRecord>, std::vector<PairRecord>> split_dataset(std::span<const PairRecord> pairs,
                                                                          double train_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "train_frac must lie strictly between 0 and 1");
    }
    std::vector<std::string> problems;
    for (const auto& p : pairs) problems.push_back(p.problem_id);
    std::sort(problems.begin(), problems.end());
    problems.erase(std::unique(problems.begin(), problems.end()), problems.end());

    Rng rng(seed);
    for (std::size_t i = problems.size(); i > 1; --i) std::swap(problems[i - 1], problems[rng.uniform_index(i)]);
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(problems.size())));

    std::map<std::string, bool> in_train;
    for (std::size_t i = 0; i < problems.size(); ++i) in_train[problems[i]] = i < n_train;

    std::pair<std::vector<PairRecord>, std::vector<PairRecord>> out;
    for (const auto& p : pairs) (in_train[p.problem_id] ? out.first : out.second).push_back(p);
    return out;
}

double PairStats::ratio() const {
    if (total == 0) throw Error(ErrorKind::EmptyPairSet, "model '" + model + "' has no pairs");
    return static_cast<double>(same) / static_cast<double>(total);
}

std::vector<PairStats> pair_stats(std::span<const PairRecord> pairs) {
    std::vector<PairStats> out;
    std::map<std::string, std::size_t> index;
    for (const auto& p : pairs) {
        auto [it, inserted] = index.try_emplace(p.model, out.size());
        if (inserted) out.push_back(PairStats{p.model, 0, 0});
        auto& s = out[it->second];
        ++s.total;
        s.same += p.label == 1 ? 1 : 0;
    }
    return out;
}

PairStats pooled_stats(std::span<const PairStats> stats, std::string name) {
    PairStats out{std::move(name), 0, 0};
    for (const auto& s : stats) {
        out.total += s.total;
        out.same += s.same;
    }
    return out;
}

void print_pair_stats(std::ostream& out, std::span<const PairStats> stats) {
    std::size_t width = std::string("Average").size();
    for (const auto& s : stats) width = std::max(width, s.model.size());
    auto row = [&](const PairStats& s) {
        out << std::left << std::setw(static_cast<int>(width)) << s.model << "  " << std::right << std::setw(11)
            << s.total << "  " << std::setw(17) << s.same << "  " << std::setw(16);
        if (s.total == 0) out << "-";
        else out << std::fixed << std::setprecision(4) << s.ratio();
        out << '\n';
    };
    out << std::left << std::setw(static_cast<int>(width)) << "Model" << "  " << std::right << std::setw(11)
        << "Total Pairs" << "  " << std::setw(17) << "Same Answer Pairs" << "  " << std::setw(16) << "Similarity Ratio"
        << '\n';
    for (const auto& s : stats) row(s);
    row(pooled_stats(stats));
}

nlohmann::json to_json(const PairRecord& p) {
    nlohmann::json j{{"problem_id", p.problem_id},
                     {"model", p.model},
                     {"left_id", p.left_id},
                     {"right_id", p.right_id},
                     {"left_segment", p.left_segment},
                     {"right_segment", p.right_segment},
                     {"label", p.label},
                     {"trunc_mode", std::string(to_string(p.trunc_mode.kind))},
                     {"k", p.trunc_mode.k}};
    if (p.left_answer) j["left_answer"] = *p.left_answer;
    if (p.right_answer) j["right_answer"] = *p.right_answer;
    return j;
}

PairRecord pair_record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::SchemaError, "expected a JSON object");
    for (const char* key : {"problem_id", "left_id", "right_id", "left_segment", "right_segment", "label"}) {
        if (!j.contains(key)) throw Error(ErrorKind::SchemaError, std::string("missing field '") + key + "'");
    }
    auto id_string = [](const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        throw Error(ErrorKind::SchemaError, "identifier must be a string or integer");
    };
    PairRecord p;
    p.problem_id = id_string(j["problem_id"]);
    p.left_id = id_string(j["left_id"]);
    p.right_id = id_string(j["right_id"]);
    if (j.contains("model") && j["model"].is_string()) p.model = j["model"].get<std::string>();
    p.left_segment = j["left_segment"].get<Tokens>();
    p.right_segment = j["right_segment"].get<Tokens>();
    if (!j["label"].is_number_integer()) throw Error(ErrorKind::SchemaError, "label must be 0 or 1");
    p.label = j["label"].get<int>();
    if (j.contains("trunc_mode")) p.trunc_mode.kind = truncation_kind_from_string(j["trunc_mode"].get<std::string>());
    if (j.contains("k")) p.trunc_mode.k = j["k"].get<std::size_t>();
    if (j.contains("left_answer") && j["left_answer"].is_string()) p.left_answer = j["left_answer"].get<std::string>();
    if (j.contains("right_answer") && j["right_answer"].is_string()) {
        p.right_answer = j["right_answer"].get<std::string>();
    }
    p.to_trace_pair().validate();
    return p;
}

void write_pairs(std::ostream& out, std::span<const PairRecord> pairs) {
    for (const auto& p : pairs) out << to_json(p).dump() << '\n';
}

std::vector<PairRecord> load_pairs(const std::filesystem::path& path) {
    std::vector<PairRecord> out;
    for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(pair_record_from_json(j)); });
    return out;
}

}  // namespace pruner
