// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "pruner/config.hpp"
#include "pruner/feature_judge.hpp"
#include "pruner/judge.hpp"
#include "pruner/metrics.hpp"
#include "pruner/pairs.hpp"
#include "pruner/pipeline.hpp"
#include "pruner/remote.hpp"
#include "pruner/sources.hpp"

namespace pruner {

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument:
            return kExitUsage;
        case ErrorKind::MissingGroundTruth:
        case ErrorKind::SingleClassDataset:
        case ErrorKind::SourceExhausted:
        case ErrorKind::InvalidDistribution:
        case ErrorKind::EmptyPairSet:
        case ErrorKind::SingleClass:
        case ErrorKind::LengthMismatch:
        case ErrorKind::ZeroBaseline:
        case ErrorKind::FileNotFound:
        case ErrorKind::SchemaError:
            return kExitData;
        case ErrorKind::IllegalTransition:
        case ErrorKind::Transport:
        case ErrorKind::Timeout:
        case ErrorKind::UnparseableVerdict:
        case ErrorKind::AlreadyTerminated:
        case ErrorKind::EmptyState:
        case ErrorKind::EmptyAnswerList:
        case ErrorKind::JudgeFailure:
            return kExitRuntime;
    }
    return kExitRuntime;
}

namespace {

namespace fs = std::filesystem;

// Raised for command-line misuse that CLI11 itself cannot detect.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Settings: defaults, then the config file, then explicit flags.
// ---------------------------------------------------------------------------

struct JudgeSettings {
    std::string kind = "oracle";
    double auroc = 0.87;
    std::optional<fs::path> path;
    std::optional<fs::path> prompt_template;
    std::optional<std::string> model;
};

struct SourceSettings {
    std::string kind = "synthetic";
    std::optional<fs::path> replay;
    std::optional<fs::path> problems;
    std::size_t n = 64;
};

struct Settings {
    PruneConfig prune;
    TrainOptions train;
    std::size_t parallelism = 1;
    std::optional<fs::path> lexicon;
    JudgeSettings judge;
    SourceSettings source;
    SyntheticSpec synthetic;
    std::size_t synthetic_problems = 10;
};

struct Flags {
    std::optional<fs::path> config;
    std::optional<double> tau;
    std::optional<std::size_t> K, K1, K2, K3, k;
    std::optional<std::string> trunc;
    std::optional<double> gamma, alpha;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> parallelism;
    std::optional<fs::path> lexicon;
    bool adaptive = false;
};

void add_common_flags(CLI::App* cmd, Flags& f, bool prune_flags, bool focal_flags) {
    cmd->add_option("--config", f.config, "TOML config file");
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--lexicon", f.lexicon, "Reasoning-word lexicon file, one word per line");
    cmd->add_option("--k", f.k, "Truncation length: tokens, or reasoning words with --trunc reasoning");
    cmd->add_option("--trunc", f.trunc, "Truncation mode: tokens | reasoning");
    if (prune_flags) {
        cmd->add_option("--tau", f.tau, "Redundancy threshold");
        cmd->add_option("--K", f.K, "Maximum number of clusters");
        cmd->add_option("--K1", f.K1, "Sampled representatives per cluster");
        cmd->add_option("--K2", f.K2, "Finish budget from the largest cluster");
        cmd->add_option("--K3", f.K3, "Traces resumed when every cluster is a singleton");
        cmd->add_option("--parallelism", f.parallelism, "Concurrent trace streams");
        cmd->add_flag("--adaptive", f.adaptive, "Raise tau by 0.03 (cap 0.9) once more than 16 clusters exist");
    }
    if (focal_flags) {
        cmd->add_option("--gamma", f.gamma, "Focal loss focusing parameter");
        cmd->add_option("--alpha", f.alpha, "Focal loss positive-class weight");
    }
}

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_relative() ? base / path : path;
}

IntRange read_range(const nlohmann::json& v) {
    if (v.is_number_integer()) return {v.get<std::size_t>(), v.get<std::size_t>()};
    if (v.is_array() && v.size() == 2) return {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
    throw Error(ErrorKind::SchemaError, "length range must be an integer or [min, max]");
}

void apply_config(Settings& s, const nlohmann::json& c, const fs::path& base) {
    try {
        read_if(c, "tau", s.prune.tau);
        read_if(c, "K", s.prune.max_clusters);
        read_if(c, "K1", s.prune.reps_per_cluster);
        read_if(c, "K2", s.prune.finish_budget);
        read_if(c, "K3", s.prune.singleton_fallback);
        if (c.contains("trunc")) s.prune.trunc_mode.kind = truncation_kind_from_string(c["trunc"].get<std::string>());
        if (c.contains("k")) s.prune.trunc_mode.k = c["k"].get<std::size_t>();
        else if (s.prune.trunc_mode.kind == TruncationKind::ReasoningWords) s.prune.trunc_mode.k = 25;
        read_if(c, "gamma", s.train.focal.gamma);
        read_if(c, "alpha", s.train.focal.alpha);
        if (c.contains("seed")) {
            s.prune.rng_seed = c["seed"].get<std::uint64_t>();
            s.train.seed = s.prune.rng_seed;
            s.synthetic.seed = s.prune.rng_seed;
        }
        read_if(c, "parallelism", s.parallelism);
        if (c.value("adaptive", false)) s.prune.adaptive_threshold = AdaptiveThreshold{};
        if (c.contains("sample_mode")) s.prune.sample_mode = sample_mode_from_string(c["sample_mode"].get<std::string>());
        if (c.contains("lexicon")) s.lexicon = resolve(base, c["lexicon"].get<std::string>());

        if (c.contains("train")) {
            const auto& t = c["train"];
            read_if(t, "oversample", s.train.oversample_factor);
            read_if(t, "epochs", s.train.epochs);
            read_if(t, "learning_rate", s.train.learning_rate);
            read_if(t, "batch_size", s.train.batch_size);
        }
        if (c.contains("judge")) {
            const auto& j = c["judge"];
            read_if(j, "kind", s.judge.kind);
            read_if(j, "auroc", s.judge.auroc);
            if (j.contains("path")) s.judge.path = resolve(base, j["path"].get<std::string>());
            if (j.contains("template")) s.judge.prompt_template = resolve(base, j["template"].get<std::string>());
            if (j.contains("model")) s.judge.model = j["model"].get<std::string>();
        }
        if (c.contains("source")) {
            const auto& src = c["source"];
            read_if(src, "kind", s.source.kind);
            if (src.contains("replay")) s.source.replay = resolve(base, src["replay"].get<std::string>());
            if (src.contains("problems")) s.source.problems = resolve(base, src["problems"].get<std::string>());
            read_if(src, "n", s.source.n);
        }
        if (c.contains("synthetic")) {
            const auto& y = c["synthetic"];
            read_if(y, "problems", s.synthetic_problems);
            read_if(y, "n_traces", s.synthetic.n_traces);
            if (y.contains("answers")) {
                s.synthetic.answers.clear();
                for (const auto& a : y["answers"]) {
                    if (!a.is_array() || a.size() != 2) {
                        throw Error(ErrorKind::SchemaError, "answers entries must be [answer, probability]");
                    }
                    const std::string answer = a[0].is_string() ? a[0].get<std::string>() : a[0].dump();
                    s.synthetic.answers.emplace_back(answer, a[1].get<double>());
                }
            }
            if (y.contains("prefix_len")) s.synthetic.prefix_len = read_range(y["prefix_len"]);
            if (y.contains("total_len")) s.synthetic.total_len = read_range(y["total_len"]);
            read_if(y, "reasoning_word_rate", s.synthetic.reasoning_word_rate);
            read_if(y, "topic_rate", s.synthetic.topic_rate);
            read_if(y, "hint_rate", s.synthetic.hint_rate);
            if (y.contains("seed")) s.synthetic.seed = y["seed"].get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaError, std::string("config: ") + e.what());
    }
}

Settings resolve_settings(const Flags& f) {
    Settings s;
    if (f.config) {
        if (!fs::exists(*f.config)) throw UsageError("config file not found: " + f.config->string());
        apply_config(s, load_toml(*f.config), f.config->parent_path());
    }
    if (f.tau) s.prune.tau = *f.tau;
    if (f.K) s.prune.max_clusters = *f.K;
    if (f.K1) s.prune.reps_per_cluster = *f.K1;
    if (f.K2) s.prune.finish_budget = *f.K2;
    if (f.K3) s.prune.singleton_fallback = *f.K3;
    if (f.trunc) {
        const auto kind = truncation_kind_from_string(*f.trunc);
        if (kind != s.prune.trunc_mode.kind && !f.k) {
            s.prune.trunc_mode = kind == TruncationKind::ReasoningWords ? TruncationMode::reasoning_words()
                                                                        : TruncationMode::fixed_tokens();
        }
        s.prune.trunc_mode.kind = kind;
    }
    if (f.k) s.prune.trunc_mode.k = *f.k;
    if (f.gamma) s.train.focal.gamma = *f.gamma;
    if (f.alpha) s.train.focal.alpha = *f.alpha;
    if (f.seed) {
        s.prune.rng_seed = *f.seed;
        s.train.seed = *f.seed;
        s.synthetic.seed = *f.seed;
    }
    if (f.parallelism) s.parallelism = *f.parallelism;
    if (f.adaptive) s.prune.adaptive_threshold = AdaptiveThreshold{};
    if (f.lexicon) s.lexicon = *f.lexicon;
    s.prune.validate();
    s.train.focal.validate();
    return s;
}

ReasoningLexicon lexicon_for(const Settings& s) {
    return s.lexicon ? ReasoningLexicon::load(*s.lexicon) : ReasoningLexicon::defaults();
}

std::unique_ptr<Judge> make_judge(const Settings& s, const ReasoningLexicon& lexicon) {
    const auto& j = s.judge;
    if (j.kind == "oracle") return std::make_unique<OracleJudge>();
    if (j.kind == "simulated") return std::make_unique<SimulatedJudge>(j.auroc, s.prune.rng_seed);
    if (j.kind == "feature") {
        if (!j.path) throw UsageError("feature judge needs --judge-file or [judge] path");
        return std::make_unique<FeatureJudge>(FeatureJudge::load(*j.path, lexicon));
    }
    if (j.kind == "remote") {
        EndpointConfig endpoint = EndpointConfig::from_env();
        if (endpoint.base_url.empty()) throw UsageError("remote judge needs PRUNER_ENDPOINT");
        if (j.model) endpoint.model = *j.model;
        JudgePromptTemplate prompt = j.prompt_template ? JudgePromptTemplate::load(*j.prompt_template)
                                                       : JudgePromptTemplate{};
        return std::make_unique<RemoteJudge>(endpoint, prompt);
    }
    throw UsageError("unknown judge kind '" + j.kind + "' (oracle | simulated | feature | remote)");
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    return out;
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

// The modal answer of a synthetic spec, first listed on ties.
std::string modal_answer(const SyntheticSpec& spec) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < spec.answers.size(); ++i) {
        if (spec.answers[i].second > spec.answers[best].second) best = i;
    }
    return spec.answers[best].first;
}

std::vector<Problem> synthetic_problems(const Settings& s) {
    std::vector<Problem> out;
    const int width = static_cast<int>(std::to_string(s.synthetic_problems == 0 ? 0 : s.synthetic_problems - 1).size());
    for (std::size_t i = 0; i < s.synthetic_problems; ++i) {
        std::string index = std::to_string(i);
        Problem p;
        p.problem_id = "p" + std::string(static_cast<std::size_t>(width) - index.size(), '0') + index;
        p.question = "synthetic problem " + index;
        p.gold_answer = modal_answer(s.synthetic);
        out.push_back(std::move(p));
    }
    return out;
}

// Oracle-style judges read the answers stored with each pair; pair files
// without them fall back to answers implied by the label.
std::pair<Segment, Segment> segments_of(const PairRecord& p) {
    Segment left{p.left_id, p.left_segment, p.left_answer};
    Segment right{p.right_id, p.right_segment, p.right_answer};
    if (!left.ground_truth || !right.ground_truth) {
        left.ground_truth = "a";
        right.ground_truth = p.label == 1 ? "a" : "b";
    }
    return {std::move(left), std::move(right)};
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct PairsBuildArgs {
    Flags flags;
    std::vector<fs::path> replay;
    fs::path out;
};

int cmd_pairs_build(const PairsBuildArgs& a, std::ostream& out, std::ostream& err) {
    const Settings s = resolve_settings(a.flags);
    const ReasoningLexicon lexicon = lexicon_for(s);
    std::vector<RecordedTrace> traces;
    for (const auto& path : a.replay) {
        auto more = load_replay(path);
        std::move(more.begin(), more.end(), std::back_inserter(traces));
    }
    const auto pairs = build_all_pairs(traces, s.prune.trunc_mode, lexicon);
    auto file = open_output(a.out);
    write_pairs(file, pairs);
    if (pairs.empty()) {
        err << "warning: no pairs built (" << traces.size() << " traces read)\n";
        return kExitOk;
    }
    const auto stats = pair_stats(pairs);
    print_pair_stats(out, stats);
    return kExitOk;
}

struct JudgeTrainArgs {
    Flags flags;
    std::vector<fs::path> pairs;
    fs::path out;
    std::optional<std::size_t> oversample, epochs, batch_size;
    std::optional<double> learning_rate;
};

int cmd_judge_train(const JudgeTrainArgs& a, std::ostream& out, std::ostream&) {
    Settings s = resolve_settings(a.flags);
    if (a.oversample) s.train.oversample_factor = *a.oversample;
    if (a.epochs) s.train.epochs = *a.epochs;
    if (a.batch_size) s.train.batch_size = *a.batch_size;
    if (a.learning_rate) s.train.learning_rate = *a.learning_rate;
    const ReasoningLexicon lexicon = lexicon_for(s);

    std::vector<TracePair> pairs;
    for (const auto& path : a.pairs) {
        for (const auto& p : load_pairs(path)) pairs.push_back(p.to_trace_pair());
    }
    const FeatureJudge judge = train_feature_judge(pairs, lexicon, s.train);
    judge.save(a.out);
    out << "trained feature judge on " << pairs.size() << " pairs -> " << a.out.string() << '\n';
    out << "weights:";
    for (double w : judge.weights()) out << ' ' << fixed(w, 6);
    out << '\n';
    return kExitOk;
}

struct JudgeEvalArgs {
    Flags flags;
    std::vector<fs::path> pairs;
    std::optional<std::string> judge_kind;
    std::optional<fs::path> judge_file;
    std::optional<double> auroc;
    std::optional<fs::path> roc_csv;
    double fnr_cap = 0.2;
    bool interpolated = false;
};

int cmd_judge_eval(const JudgeEvalArgs& a, std::ostream& out, std::ostream&) {
    Settings s = resolve_settings(a.flags);
    if (a.judge_kind) s.judge.kind = *a.judge_kind;
    if (a.judge_file) {
        s.judge.path = *a.judge_file;
        if (!a.judge_kind) s.judge.kind = "feature";
    }
    if (a.auroc) s.judge.auroc = *a.auroc;
    const ReasoningLexicon lexicon = lexicon_for(s);
    const auto judge = make_judge(s, lexicon);

    struct Row {
        std::string name;
        double auroc;
        double tnr;
    };
    std::vector<Row> rows;
    std::vector<double> all_scores;
    std::vector<int> all_labels;
    for (const auto& path : a.pairs) {
        const auto pairs = load_pairs(path);
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& p : pairs) {
            auto [left, right] = segments_of(p);
            scores.push_back(judge->score(left, right).value());
            labels.push_back(p.label);
        }
        const double tnr = a.interpolated ? tnr_at_fnr_interpolated(scores, labels, a.fnr_cap)
                                          : tnr_at_fnr(scores, labels, a.fnr_cap).tnr;
        rows.push_back({path.stem().string(), auroc(scores, labels), tnr});
        all_scores.insert(all_scores.end(), scores.begin(), scores.end());
        all_labels.insert(all_labels.end(), labels.begin(), labels.end());
    }
    if (a.roc_csv) {
        auto file = open_output(*a.roc_csv);
        write_roc_csv(file, roc_curve(all_scores, all_labels));
    }

    std::size_t width = std::string("Average").size();
    for (const auto& r : rows) width = std::max(width, r.name.size());
    const std::string tnr_label = "TNR@" + fixed(a.fnr_cap, 1);
    out << "Judge: " << judge->name() << '\n';
    out << std::left << std::setw(static_cast<int>(width)) << "Set" << "  " << std::right << std::setw(8) << "AUROC"
        << "  " << std::setw(8) << tnr_label << '\n';
    double sum_auroc = 0.0, sum_tnr = 0.0;
    for (const auto& r : rows) {
        out << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::right << std::setw(8)
            << fixed(r.auroc, 4) << "  " << std::setw(8) << fixed(r.tnr, 4) << '\n';
        sum_auroc += r.auroc;
        sum_tnr += r.tnr;
    }
    const auto n = static_cast<double>(rows.size());
    out << std::left << std::setw(static_cast<int>(width)) << "Average" << "  " << std::right << std::setw(8)
        << fixed(sum_auroc / n, 4) << "  " << std::setw(8) << fixed(sum_tnr / n, 4) << '\n';
    return kExitOk;
}

struct RunArgs {
    Flags flags;
    std::optional<std::string> source_kind, judge_kind;
    std::optional<fs::path> replay, problems, judge_file;
    std::optional<double> auroc;
    std::optional<std::size_t> n;
    std::optional<double> baseline;
    bool baseline_from_source = false;
    fs::path out;
    std::optional<fs::path> csv, events, audit;
    bool no_pass_at_k = false;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream&) {
    Settings s = resolve_settings(a.flags);
    if (a.source_kind) s.source.kind = *a.source_kind;
    if (a.replay) s.source.replay = *a.replay;
    if (a.problems) s.source.problems = *a.problems;
    if (a.n) s.source.n = *a.n;
    if (a.judge_kind) s.judge.kind = *a.judge_kind;
    if (a.judge_file) {
        s.judge.path = *a.judge_file;
        if (!a.judge_kind) s.judge.kind = "feature";
    }
    if (a.auroc) s.judge.auroc = *a.auroc;
    if (a.baseline && a.baseline_from_source) throw UsageError("--baseline and --baseline-from-source are exclusive");

    const ReasoningLexicon lexicon = lexicon_for(s);
    const auto judge = make_judge(s, lexicon);

    std::unique_ptr<GenerationSource> source;
    std::vector<Problem> problems;
    if (s.source.kind == "replay") {
        if (!s.source.replay) throw UsageError("replay source needs --replay or [source] replay");
        auto replay = std::make_unique<ReplaySource>(load_replay(*s.source.replay));
        if (s.source.problems) {
            problems = load_problems(*s.source.problems);
        } else {
            for (const auto& [id, traces] : replay->by_problem()) problems.push_back(Problem{id, "", std::nullopt});
        }
        source = std::move(replay);
    } else if (s.source.kind == "synthetic") {
        s.synthetic.n_traces = s.source.n;
        source = std::make_unique<SyntheticSource>(s.synthetic);
        problems = s.source.problems ? load_problems(*s.source.problems) : synthetic_problems(s);
    } else if (s.source.kind == "remote") {
        if (!s.source.problems) throw UsageError("remote source needs --problems");
        RemoteSourceOptions options;
        options.endpoint = EndpointConfig::from_env();
        if (options.endpoint.base_url.empty()) throw UsageError("remote source needs PRUNER_ENDPOINT");
        source = std::make_unique<RemoteSource>(options);
        problems = load_problems(*s.source.problems);
    } else {
        throw UsageError("unknown source kind '" + s.source.kind + "' (replay | synthetic | remote)");
    }

    RunOptions options;
    options.n_traces = s.source.kind == "replay" && !a.n ? 0 : s.source.n;
    options.lexicon = lexicon;
    options.parallelism = s.parallelism;
    options.evaluate_pass_at_k = !a.no_pass_at_k;

    std::ofstream events_file, audit_file;
    RunSinks sinks;
    if (a.events) {
        events_file = open_output(*a.events);
        sinks.events = &events_file;
    }
    if (a.audit) {
        audit_file = open_output(*a.audit);
        sinks.audit = &audit_file;
    }

    BenchmarkReport report = run_benchmark(problems, *source, *judge, s.prune, options, a.baseline, sinks);
    if (a.baseline_from_source) {
        double cons = 0.0;
        for (const auto& p : report.problems) {
            if (!p.cons_tokens) throw UsageError("source does not know full-length token totals");
            cons += static_cast<double>(*p.cons_tokens);
        }
        report = aggregate(std::move(report.problems), cons);
    }

    nlohmann::json j = report;
    j["config"] = s.prune;
    j["judge"] = judge->name();
    {
        auto file = open_output(a.out);
        file << j.dump(2) << '\n';
    }
    {
        fs::path csv_path = a.csv ? *a.csv : fs::path(a.out).replace_extension(".csv");
        auto file = open_output(csv_path);
        write_summary_csv(file, report);
    }
    out << "problems " << report.problems.size() << "  accuracy " << fixed(report.accuracy, 4) << "  tokens "
        << report.total_tokens << "  judge_calls " << report.total_judge_calls;
    if (report.delta_token_pct) out << "  delta_token_pct " << fixed(*report.delta_token_pct, 1);
    out << '\n';
    return kExitOk;
}

struct MergeArgs {
    std::vector<fs::path> inputs;
    fs::path out;
    std::optional<fs::path> csv;
};

int cmd_report_merge(const MergeArgs& a, std::ostream& out, std::ostream&) {
    std::vector<ProblemReport> problems;
    std::optional<double> baseline = 0.0;
    for (const auto& path : a.inputs) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::FileNotFound, path.string());
        BenchmarkReport r;
        try {
            r = nlohmann::json::parse(in).get<BenchmarkReport>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
        }
        if (baseline && r.baseline_tokens) *baseline += *r.baseline_tokens;
        else baseline.reset();
        std::move(r.problems.begin(), r.problems.end(), std::back_inserter(problems));
    }
    BenchmarkReport merged = aggregate(std::move(problems), baseline);
    {
        auto file = open_output(a.out);
        file << nlohmann::json(merged).dump(2) << '\n';
    }
    {
        fs::path csv_path = a.csv ? *a.csv : fs::path(a.out).replace_extension(".csv");
        auto file = open_output(csv_path);
        write_summary_csv(file, merged);
    }
    out << "merged " << a.inputs.size() << " reports, " << merged.problems.size() << " problems\n";
    return kExitOk;
}

struct SimulateArgs {
    Flags flags;
    std::optional<std::size_t> count, n;
    std::optional<std::string> answers;
    std::optional<std::size_t> prefix_min, prefix_max, total_min, total_max;
    fs::path replay_out;
    fs::path problems_out;
};

std::vector<std::pair<std::string, double>> parse_answer_list(const std::string& text) {
    std::vector<std::pair<std::string, double>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos) throw UsageError("--answers entries look like answer:probability");
        try {
            out.emplace_back(item.substr(0, colon), std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw UsageError("bad probability in '" + item + "'");
        }
    }
    return out;
}

int cmd_simulate_gen(const SimulateArgs& a, std::ostream& out, std::ostream&) {
    Settings s = resolve_settings(a.flags);
    if (a.count) s.synthetic_problems = *a.count;
    if (a.n) s.synthetic.n_traces = *a.n;
    if (a.answers) s.synthetic.answers = parse_answer_list(*a.answers);
    if (a.prefix_min) s.synthetic.prefix_len.min = *a.prefix_min;
    if (a.prefix_max) s.synthetic.prefix_len.max = *a.prefix_max;
    if (a.total_min) s.synthetic.total_len.min = *a.total_min;
    if (a.total_max) s.synthetic.total_len.max = *a.total_max;
    s.synthetic.validate();

    const auto problems = synthetic_problems(s);
    SyntheticSource source(s.synthetic);
    std::vector<RecordedTrace> traces;
    for (const auto& p : problems) {
        auto more = generate_synthetic(source.spec_for(p, s.synthetic.n_traces), p.problem_id);
        std::move(more.begin(), more.end(), std::back_inserter(traces));
    }
    {
        auto file = open_output(a.problems_out);
        write_problems(file, problems);
    }
    {
        auto file = open_output(a.replay_out);
        write_replay(file, traces);
    }
    out << "wrote " << problems.size() << " problems and " << traces.size() << " traces\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Redundancy-pruned parallel reasoning: pair building, judge training, online pruning runs"};
    app.name(args.empty() ? "pruner" : args[0]);
    app.require_subcommand(1);

    PairsBuildArgs pairs_build;
    auto* pairs = app.add_subcommand("pairs", "Trace-pair datasets");
    pairs->require_subcommand(1);
    auto* pairs_build_cmd = pairs->add_subcommand("build", "Pair every two traces of a problem and label them");
    add_common_flags(pairs_build_cmd, pairs_build.flags, false, false);
    pairs_build_cmd->add_option("--replay", pairs_build.replay, "Replay JSONL file(s)")->required();
    pairs_build_cmd->add_option("--out", pairs_build.out, "Pair JSONL output")->required();

    JudgeTrainArgs train;
    JudgeEvalArgs eval;
    auto* judge = app.add_subcommand("judge", "Train and evaluate judges");
    judge->require_subcommand(1);
    auto* train_cmd = judge->add_subcommand("train", "Fit the feature judge with focal loss");
    add_common_flags(train_cmd, train.flags, false, true);
    train_cmd->add_option("--pairs", train.pairs, "Pair JSONL file(s)")->required();
    train_cmd->add_option("--out", train.out, "Judge JSON output")->required();
    train_cmd->add_option("--oversample", train.oversample, "Minority-class oversampling factor");
    train_cmd->add_option("--epochs", train.epochs, "Training epochs");
    train_cmd->add_option("--lr", train.learning_rate, "Learning rate");
    train_cmd->add_option("--batch-size", train.batch_size, "Mini-batch size");

    auto* eval_cmd = judge->add_subcommand("eval", "AUROC and TNR at a false-negative cap, per pair set");
    add_common_flags(eval_cmd, eval.flags, false, false);
    eval_cmd->add_option("--pairs", eval.pairs, "Pair JSONL file(s), one row each")->required();
    eval_cmd->add_option("--judge", eval.judge_kind, "oracle | simulated | feature | remote");
    eval_cmd->add_option("--judge-file", eval.judge_file, "Trained feature judge JSON");
    eval_cmd->add_option("--auroc", eval.auroc, "Target AUROC of the simulated judge");
    eval_cmd->add_option("--roc-csv", eval.roc_csv, "Write the pooled ROC curve as CSV");
    eval_cmd->add_option("--fnr-cap", eval.fnr_cap, "False-negative-rate cap")->check(CLI::Range(0.0, 1.0));
    eval_cmd->add_flag("--interpolated", eval.interpolated, "Read TNR off the interpolated ROC curve");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Online pruning over a benchmark");
    add_common_flags(run_cmd, run.flags, true, false);
    run_cmd->add_option("--source", run.source_kind, "replay | synthetic | remote");
    run_cmd->add_option("--replay", run.replay, "Replay JSONL");
    run_cmd->add_option("--problems", run.problems, "Problems JSONL");
    run_cmd->add_option("--n", run.n, "Traces per problem");
    run_cmd->add_option("--judge", run.judge_kind, "oracle | simulated | feature | remote");
    run_cmd->add_option("--judge-file", run.judge_file, "Trained feature judge JSON");
    run_cmd->add_option("--auroc", run.auroc, "Target AUROC of the simulated judge");
    run_cmd->add_option("--baseline", run.baseline, "Total tokens of the unpruned baseline");
    run_cmd->add_flag("--baseline-from-source", run.baseline_from_source,
                      "Use the source's full-length token totals as the baseline");
    run_cmd->add_option("--out", run.out, "JSON report output")->required();
    run_cmd->add_option("--csv", run.csv, "CSV summary output (default: --out with .csv)");
    run_cmd->add_option("--events", run.events, "Event log JSONL output");
    run_cmd->add_option("--audit", run.audit, "Clustering audit JSONL output");
    run_cmd->add_flag("--no-pass-at-k", run.no_pass_at_k, "Skip resuming cluster representatives");

    MergeArgs merge;
    auto* report = app.add_subcommand("report", "Report utilities");
    report->require_subcommand(1);
    auto* merge_cmd = report->add_subcommand("merge", "Combine run reports");
    merge_cmd->add_option("inputs", merge.inputs, "Report JSON files")->required();
    merge_cmd->add_option("--out", merge.out, "Merged JSON report")->required();
    merge_cmd->add_option("--csv", merge.csv, "CSV summary output (default: --out with .csv)");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Synthetic data");
    simulate->require_subcommand(1);
    auto* gen_cmd = simulate->add_subcommand("gen", "Write synthetic problems and replay traces");
    add_common_flags(gen_cmd, sim.flags, false, false);
    gen_cmd->add_option("--count", sim.count, "Number of problems");
    gen_cmd->add_option("--n", sim.n, "Traces per problem");
    gen_cmd->add_option("--answers", sim.answers, "Answer distribution, e.g. 42:0.8,17:0.2");
    gen_cmd->add_option("--prefix-min", sim.prefix_min, "Shortest opening section, in tokens");
    gen_cmd->add_option("--prefix-max", sim.prefix_max, "Longest opening section, in tokens");
    gen_cmd->add_option("--total-min", sim.total_min, "Shortest full trace, in tokens");
    gen_cmd->add_option("--total-max", sim.total_max, "Longest full trace, in tokens");
    gen_cmd->add_option("--replay-out", sim.replay_out, "Replay JSONL output")->required();
    gen_cmd->add_option("--problems-out", sim.problems_out, "Problems JSONL output")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (pairs_build_cmd->parsed()) return cmd_pairs_build(pairs_build, out, err);
        if (train_cmd->parsed()) return cmd_judge_train(train, out, err);
        if (eval_cmd->parsed()) return cmd_judge_eval(eval, out, err);
        if (run_cmd->parsed()) return cmd_run(run, out, err);
        if (merge_cmd->parsed()) return cmd_report_merge(merge, out, err);
        if (gen_cmd->parsed()) return cmd_simulate_gen(sim, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace pruner
