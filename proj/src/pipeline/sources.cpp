// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/sources.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>

#include "pruner/answer.hpp"
#include "pruner/errors.hpp"
#include "pruner/jsonl.hpp"
#include "pruner/rng.hpp"
#include "pruner/truncation.hpp"

namespace pruner {

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

RecordedStream::RecordedStream(std::shared_ptr<const RecordedTrace> trace) : trace_(std::move(trace)) {}

std::size_t RecordedStream::emit_until(const std::function<bool(const std::string&)>& on_token) {
    static const std::string placeholder(kUnrecordedToken);
    std::size_t emitted = 0;
    while (cursor_ < trace_->total_tokens) {
        const std::string& tok = cursor_ < trace_->tokens.size() ? trace_->tokens[cursor_] : placeholder;
        ++cursor_;
        ++emitted;
        if (!on_token(tok)) break;
    }
    return emitted;
}

std::optional<std::string> RecordedStream::final_answer() const {
    return finished() ? trace_->final_answer : std::nullopt;
}

ReplaySource::ReplaySource(std::vector<RecordedTrace> traces) {
    for (auto& t : traces) {
        auto ptr = std::make_shared<const RecordedTrace>(std::move(t));
        by_problem_[ptr->problem_id].push_back(std::move(ptr));
    }
}

std::vector<std::unique_ptr<TraceStream>> ReplaySource::start(const Problem& problem, std::size_t n) {
    auto it = by_problem_.find(problem.problem_id);
    const std::size_t available = it == by_problem_.end() ? 0 : it->second.size();
    if (n == 0) n = available;
    if (available < n || n == 0) {
        throw Error(ErrorKind::SourceExhausted, "problem '" + problem.problem_id + "' has " +
                                                    std::to_string(available) + " recorded traces, need " +
                                                    std::to_string(n));
    }
    std::vector<std::unique_ptr<TraceStream>> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::make_unique<RecordedStream>(it->second[i]));
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic
// ---------------------------------------------------------------------------

void SyntheticSpec::validate() const {
    if (n_traces < 1) throw Error(ErrorKind::InvalidDistribution, "n_traces must be >= 1");
    if (answers.empty()) throw Error(ErrorKind::InvalidDistribution, "answer distribution is empty");
    double total = 0.0;
    for (const auto& [answer, p] : answers) {
        if (!(p >= 0.0)) throw Error(ErrorKind::InvalidDistribution, "negative probability for '" + answer + "'");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw Error(ErrorKind::InvalidDistribution, "answer probabilities sum to " + std::to_string(total));
    }
    if (prefix_len.min > prefix_len.max || total_len.min > total_len.max) {
        throw Error(ErrorKind::InvalidDistribution, "length range has min > max");
    }
    if (total_len.max < 1) throw Error(ErrorKind::InvalidDistribution, "traces need at least one token");
    for (double rate : {reasoning_word_rate, topic_rate, hint_rate}) {
        if (!(rate >= 0.0 && rate <= 1.0)) throw Error(ErrorKind::InvalidDistribution, "rates must lie in [0,1]");
    }
}

namespace {

std::size_t draw_range(Rng& rng, const IntRange& r) { return r.min + rng.uniform_index(r.max - r.min + 1); }

const std::vector<std::string>& marker_pool() {
    static const std::vector<std::string> pool = [] {
        std::vector<std::string> out;
        const ReasoningLexicon lexicon = ReasoningLexicon::defaults();
        for (const auto& w : lexicon.words()) {
            out.push_back(w);
            std::string cap = w;
            cap[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cap[0])));
            out.push_back(cap + ",");
        }
        return out;
    }();
    return pool;
}

constexpr std::uint64_t kFillerVocabulary = 400;
constexpr std::uint64_t kTopicVocabulary = 40;

}  // namespace

std::vector<RecordedTrace> generate_synthetic(const SyntheticSpec& spec, std::string_view problem_id) {
    spec.validate();
    std::vector<RecordedTrace> out;
    out.reserve(spec.n_traces);
    const auto& markers = marker_pool();
    const int width = static_cast<int>(std::to_string(spec.n_traces - 1).size());

    for (std::size_t i = 0; i < spec.n_traces; ++i) {
        Rng rng(mix_seed(spec.seed, mix_seed(fnv1a64(problem_id), i)));

        // Cumulative draw; the last answer absorbs any rounding slack.
        const double u = rng.uniform01();
        std::size_t pick = spec.answers.size() - 1;
        double acc = 0.0;
        for (std::size_t a = 0; a < spec.answers.size(); ++a) {
            acc += spec.answers[a].second;
            if (u < acc) {
                pick = a;
                break;
            }
        }
        const std::string& answer = spec.answers[pick].first;
        const std::uint64_t topic = fnv1a64(answer);

        const std::size_t opening = draw_range(rng, spec.prefix_len);
        const std::size_t total = std::max(draw_range(rng, spec.total_len), std::max<std::size_t>(opening, 1));

        RecordedTrace t;
        t.problem_id = std::string(problem_id);
        std::string index = std::to_string(i);
        t.trace_id = "t" + std::string(static_cast<std::size_t>(width) - index.size(), '0') + index;
        t.model = "synthetic";
        t.total_tokens = total;
        t.final_answer = answer;
        t.tokens.reserve(total);
        for (std::size_t pos = 0; pos < total; ++pos) {
            const bool in_opening = pos < opening;
            const double r = rng.uniform01();
            if (r < spec.reasoning_word_rate) {
                t.tokens.push_back(markers[rng.uniform_index(markers.size())]);
            } else if (in_opening && r < spec.reasoning_word_rate + spec.hint_rate) {
                t.tokens.push_back(answer);
            } else if (in_opening && r < spec.reasoning_word_rate + spec.hint_rate + spec.topic_rate) {
                t.tokens.push_back("v" + std::to_string((topic + rng.uniform_index(kTopicVocabulary)) % 100000));
            } else {
                t.tokens.push_back("w" + std::to_string(rng.uniform_index(kFillerVocabulary)));
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

SyntheticSource::SyntheticSource(SyntheticSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

SyntheticSpec SyntheticSource::spec_for(const Problem& problem, std::size_t n) const {
    SyntheticSpec spec = spec_;
    if (n > 0) spec.n_traces = n;
    spec.seed = mix_seed(spec_.seed, fnv1a64(problem.problem_id));
    return spec;
}

std::vector<std::unique_ptr<TraceStream>> SyntheticSource::start(const Problem& problem, std::size_t n) {
    auto traces = generate_synthetic(spec_for(problem, n), problem.problem_id);
    std::vector<std::unique_ptr<TraceStream>> out;
    out.reserve(traces.size());
    for (auto& t : traces) out.push_back(std::make_unique<RecordedStream>(std::make_shared<const RecordedTrace>(std::move(t))));
    return out;
}

// ---------------------------------------------------------------------------
// Remote
// ---------------------------------------------------------------------------

namespace {

class RemoteStream final : public TraceStream {
public:
    RemoteStream(TraceId id, std::string question, std::shared_ptr<ChatClient> client, RemoteSourceOptions options)
        : id_(std::move(id)), question_(std::move(question)), client_(std::move(client)), options_(std::move(options)) {}

    const TraceId& trace_id() const noexcept override { return id_; }
    bool finished() const noexcept override { return finished_; }

    std::optional<std::string> final_answer() const override {
        if (!finished_) return std::nullopt;
        return extract_boxed_answer(join_tokens(tokens_));
    }

    std::size_t emit_until(const std::function<bool(const std::string&)>& on_token) override {
        if (finished_) return 0;
        nlohmann::json messages = nlohmann::json::array({{{"role", "user"}, {"content", question_}}});
        if (!tokens_.empty()) messages.push_back({{"role", "assistant"}, {"content", join_tokens(tokens_)}});
        const nlohmann::json body{{"model", client_->config().model},
                                  {"temperature", options_.temperature},
                                  {"max_tokens", options_.max_tokens - std::min(options_.max_tokens, tokens_.size())},
                                  {"messages", messages}};

        std::size_t emitted = 0;
        bool stopped = false;
        std::string pending;
        auto deliver = [&](std::string token) {
            tokens_.push_back(std::move(token));
            ++emitted;
            if (!on_token(tokens_.back())) stopped = true;
            return !stopped;
        };
        client_->stream(body, [&](std::string_view delta) {
            // A token is complete once whitespace follows it; the trailing
            // partial word waits for the next fragment.
            for (char c : delta) {
                if (std::isspace(static_cast<unsigned char>(c))) {
                    if (!pending.empty() && !deliver(std::exchange(pending, {}))) return false;
                } else {
                    pending += c;
                }
            }
            return true;
        });
        if (!stopped) {
            if (!pending.empty()) deliver(std::move(pending));
            finished_ = !stopped;
        }
        return emitted;
    }

private:
    TraceId id_;
    std::string question_;
    std::shared_ptr<ChatClient> client_;
    RemoteSourceOptions options_;
    Tokens tokens_;
    bool finished_ = false;
};

}  // namespace

RemoteSource::RemoteSource(RemoteSourceOptions options)
    : options_(std::move(options)), client_(std::make_shared<ChatClient>(options_.endpoint)) {}

std::vector<std::unique_ptr<TraceStream>> RemoteSource::start(const Problem& problem, std::size_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "remote source needs an explicit trace count");
    std::vector<std::unique_ptr<TraceStream>> out;
    const int width = static_cast<int>(std::to_string(n - 1).size());
    for (std::size_t i = 0; i < n; ++i) {
        std::string index = std::to_string(i);
        out.push_back(std::make_unique<RemoteStream>(
            "t" + std::string(static_cast<std::size_t>(width) - index.size(), '0') + index, problem.question, client_,
            options_));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

RecordedTrace recorded_trace_from_json(const nlohmann::json& j) {
    auto id_string = [](const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        throw Error(ErrorKind::SchemaError, "identifier must be a string or integer");
    };
    if (!j.is_object()) throw Error(ErrorKind::SchemaError, "expected a JSON object");
    if (!j.contains("problem_id") || !j.contains("trace_id")) {
        throw Error(ErrorKind::SchemaError, "missing problem_id or trace_id");
    }
    RecordedTrace t;
    t.problem_id = id_string(j["problem_id"]);
    t.trace_id = id_string(j["trace_id"]);
    if (j.contains("model") && j["model"].is_string()) t.model = j["model"].get<std::string>();
    if (j.contains("tokens")) {
        if (!j["tokens"].is_array()) throw Error(ErrorKind::SchemaError, "tokens must be an array");
        for (const auto& tok : j["tokens"]) {
            if (!tok.is_string()) throw Error(ErrorKind::SchemaError, "tokens must be strings");
            t.tokens.push_back(tok.get<std::string>());
        }
    } else if (j.contains("text") && j["text"].is_string()) {
        t.tokens = tokenize(j["text"].get<std::string>());
    } else {
        throw Error(ErrorKind::SchemaError, "need tokens or text");
    }
    t.total_tokens = t.tokens.size();
    if (j.contains("total_tokens") && !j["total_tokens"].is_null()) {
        if (!j["total_tokens"].is_number_unsigned() && !j["total_tokens"].is_number_integer()) {
            throw Error(ErrorKind::SchemaError, "total_tokens must be an integer");
        }
        const auto total = j["total_tokens"].get<long long>();
        if (total < static_cast<long long>(t.tokens.size())) {
            throw Error(ErrorKind::SchemaError, "total_tokens smaller than the recorded token count");
        }
        t.total_tokens = static_cast<std::size_t>(total);
    }
    if (j.contains("final_answer") && !j["final_answer"].is_null()) {
        if (j["final_answer"].is_string()) t.final_answer = j["final_answer"].get<std::string>();
        else if (j["final_answer"].is_number()) t.final_answer = j["final_answer"].dump();
        else throw Error(ErrorKind::SchemaError, "final_answer must be a string");
        if (t.final_answer->empty()) t.final_answer.reset();
    }
    return t;
}

nlohmann::json to_json(const RecordedTrace& t) {
    nlohmann::json j{{"problem_id", t.problem_id},
                     {"trace_id", t.trace_id},
                     {"model", t.model},
                     {"tokens", t.tokens},
                     {"total_tokens", t.total_tokens}};
    j["final_answer"] = t.final_answer ? nlohmann::json(*t.final_answer) : nlohmann::json(nullptr);
    return j;
}

std::vector<RecordedTrace> load_replay(const std::filesystem::path& path) {
    std::vector<RecordedTrace> out;
    for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(recorded_trace_from_json(j)); });
    return out;
}

std::vector<Problem> load_problems(const std::filesystem::path& path) {
    std::vector<Problem> out;
    for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
        if (!j.is_object() || !j.contains("problem_id")) throw Error(ErrorKind::SchemaError, "missing problem_id");
        Problem p;
        p.problem_id = j["problem_id"].is_string() ? j["problem_id"].get<std::string>() : j["problem_id"].dump();
        p.question = j.value("question", std::string{});
        if (j.contains("gold_answer") && !j["gold_answer"].is_null()) {
            p.gold_answer = j["gold_answer"].is_string() ? j["gold_answer"].get<std::string>() : j["gold_answer"].dump();
        }
        out.push_back(std::move(p));
    });
    return out;
}

void write_replay(std::ostream& out, const std::vector<RecordedTrace>& traces) {
    for (const auto& t : traces) out << to_json(t).dump() << '\n';
}

void write_problems(std::ostream& out, const std::vector<Problem>& problems) {
    for (const auto& p : problems) {
        nlohmann::json j{{"problem_id", p.problem_id}, {"question", p.question}};
        j["gold_answer"] = p.gold_answer ? nlohmann::json(*p.gold_answer) : nlohmann::json(nullptr);
        out << j.dump() << '\n';
    }
}

}  // namespace pruner
