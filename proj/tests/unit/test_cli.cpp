// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pruner/cli.hpp"
#include "pruner/config.hpp"
#include "pruner/errors.hpp"
#include "pruner/pairs.hpp"
#include "pruner/sources.hpp"
#include "testing.hpp"

using namespace pruner;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "pruner");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write(const fs::path& p, const std::string& body) {
    std::ofstream(p, std::ios::binary) << body;
    return p;
}

std::string replay_line(const std::string& problem, const std::string& id, const std::string& answer) {
    return "{\"problem_id\":\"" + problem + "\",\"trace_id\":\"" + id +
           "\",\"text\":\"step one wait step two\",\"final_answer\":\"" + answer + "\"}\n";
}

}  // namespace

TEST_CASE("exit codes by error kind") {
    CHECK(exit_code_for(ErrorKind::InvalidArgument) == kExitUsage);
    CHECK(exit_code_for(ErrorKind::SchemaError) == kExitData);
    CHECK(exit_code_for(ErrorKind::FileNotFound) == kExitData);
    CHECK(exit_code_for(ErrorKind::SingleClassDataset) == kExitData);
    CHECK(exit_code_for(ErrorKind::Transport) == kExitRuntime);
    CHECK(exit_code_for(ErrorKind::JudgeFailure) == kExitRuntime);
}

TEST_CASE("usage errors") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"bogus"}).code == kExitUsage);
    CHECK(cli({"run"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
    const auto dir = testing::scratch_dir("cli_usage");
    const auto missing = cli({"run", "--config", (dir / "nope.toml").string(), "--out", (dir / "r.json").string()});
    CHECK(missing.code == kExitUsage);
    CHECK(missing.err.find("config file not found") != std::string::npos);
    CHECK(missing.err.find("--help") != std::string::npos);
    CHECK(cli({"run", "--tau", "1.5", "--out", (dir / "r.json").string()}).code == kExitUsage);
    CHECK(cli({"run", "--judge", "psychic", "--out", (dir / "r.json").string()}).code == kExitUsage);
}

TEST_CASE("pairs build reports counts and line numbers") {
    const auto dir = testing::scratch_dir("cli_pairs");
    std::string body;
    for (int i = 0; i < 4; ++i) body += replay_line("p", "t" + std::to_string(i), i < 3 ? "1" : "2");
    const auto replay = write(dir / "replay.jsonl", body);
    const auto r = cli({"pairs", "build", "--replay", replay.string(), "--out", (dir / "pairs.jsonl").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("Similarity Ratio") != std::string::npos);
    CHECK(r.out.find("0.5000") != std::string::npos);
    CHECK(load_pairs(dir / "pairs.jsonl").size() == 6);

    const auto empty = write(dir / "empty.jsonl", "");
    const auto e = cli({"pairs", "build", "--replay", empty.string(), "--out", (dir / "none.jsonl").string()});
    CHECK(e.code == kExitOk);
    CHECK(e.err.find("warning") != std::string::npos);
    CHECK(slurp(dir / "none.jsonl").empty());

    std::string bad;
    for (int i = 0; i < 6; ++i) bad += replay_line("p", "t" + std::to_string(i), "1");
    bad += "{\"problem_id\": \"p\", \"trace_id\": \n";
    const auto malformed = write(dir / "malformed.jsonl", bad);
    const auto m = cli({"pairs", "build", "--replay", malformed.string(), "--out", (dir / "m.jsonl").string()});
    CHECK(m.code == kExitData);
    CHECK(m.err.find("SchemaError") != std::string::npos);
    CHECK(m.err.find("malformed.jsonl:7:") != std::string::npos);

    const auto nf = cli({"pairs", "build", "--replay", (dir / "absent.jsonl").string(), "--out", (dir / "x").string()});
    CHECK(nf.code == kExitData);
}

TEST_CASE("judge train and eval") {
    const auto dir = testing::scratch_dir("cli_judge");
    const auto gen = cli({"simulate", "gen", "--count", "6", "--n", "12", "--answers", "1:0.6,2:0.4", "--prefix-min",
                          "40", "--prefix-max", "60", "--total-min", "80", "--total-max", "120", "--seed", "3",
                          "--replay-out", (dir / "replay.jsonl").string(), "--problems-out",
                          (dir / "problems.jsonl").string()});
    REQUIRE(gen.code == kExitOk);
    CHECK(load_replay(dir / "replay.jsonl").size() == 72);
    CHECK(load_problems(dir / "problems.jsonl").size() == 6);

    REQUIRE(cli({"pairs", "build", "--replay", (dir / "replay.jsonl").string(), "--out", (dir / "pairs.jsonl").string(),
                 "--k", "50"})
                .code == kExitOk);
    CHECK(load_pairs(dir / "pairs.jsonl").size() == 6 * 66);

    const auto oracle = cli({"judge", "eval", "--pairs", (dir / "pairs.jsonl").string(), "--judge", "oracle",
                             "--roc-csv", (dir / "roc.csv").string()});
    REQUIRE(oracle.code == kExitOk);
    CHECK(oracle.out.find("Judge: oracle") != std::string::npos);
    CHECK(oracle.out.find("pairs      1.0000    1.0000") != std::string::npos);
    CHECK(slurp(dir / "roc.csv").rfind("fpr,tpr,threshold\n", 0) == 0);

    const auto train = cli({"judge", "train", "--pairs", (dir / "pairs.jsonl").string(), "--out",
                            (dir / "judge.json").string(), "--seed", "5", "--epochs", "20", "--gamma", "1.5"});
    REQUIRE(train.code == kExitOk);
    const auto saved = nlohmann::json::parse(slurp(dir / "judge.json"));
    CHECK(saved.at("focal").at("gamma") == 1.5);
    CHECK(saved.at("seed") == 5);
    const auto again = cli({"judge", "train", "--pairs", (dir / "pairs.jsonl").string(), "--out",
                            (dir / "judge2.json").string(), "--seed", "5", "--epochs", "20", "--gamma", "1.5"});
    CHECK(slurp(dir / "judge.json") == slurp(dir / "judge2.json"));

    const auto feature = cli({"judge", "eval", "--pairs", (dir / "pairs.jsonl").string(), "--judge-file",
                              (dir / "judge.json").string()});
    CHECK(feature.code == kExitOk);
    CHECK(feature.out.find("Judge: feature") != std::string::npos);

    // Pairs that all agree cannot train a classifier.
    std::string same;
    for (int i = 0; i < 3; ++i) same += replay_line("p", "t" + std::to_string(i), "1");
    write(dir / "same.jsonl", same);
    REQUIRE(cli({"pairs", "build", "--replay", (dir / "same.jsonl").string(), "--out", (dir / "same_pairs.jsonl").string()})
                .code == kExitOk);
    CHECK(cli({"judge", "train", "--pairs", (dir / "same_pairs.jsonl").string(), "--out", (dir / "j.json").string()})
              .code == kExitData);
}

TEST_CASE("pairs without answers evaluate from their labels") {
    const auto dir = testing::scratch_dir("cli_labels");
    std::string body;
    for (int i = 0; i < 10; ++i) {
        body += "{\"problem_id\":\"p\",\"left_id\":\"a" + std::to_string(i) + "\",\"right_id\":\"b" +
                std::to_string(i) + "\",\"left_segment\":[\"x\"],\"right_segment\":[\"y\"],\"label\":" +
                std::to_string(i % 2) + "}\n";
    }
    write(dir / "bare.jsonl", body);
    const auto r = cli({"judge", "eval", "--pairs", (dir / "bare.jsonl").string(), "--judge", "oracle"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("1.0000") != std::string::npos);
}

TEST_CASE("run is deterministic and writes the summary csv") {
    const auto dir = testing::scratch_dir("cli_run");
    write(dir / "run.toml",
          "# synthetic benchmark\n"
          "tau = 0.5\nK = 32\nK1 = 10\nK2 = 10\nK3 = 64\nk = 500\nseed = 9\n\n"
          "[judge]\nkind = \"oracle\"\n\n"
          "[source]\nkind = \"synthetic\"\nn = 64\n\n"
          "[synthetic]\nproblems = 3\nanswers = [[\"42\", 1.0]]\nprefix_len = 500\ntotal_len = 5000\n");
    auto run = [&](const std::string& name, std::vector<std::string> extra) {
        std::vector<std::string> args{"run", "--config", (dir / "run.toml").string(), "--out", (dir / name).string(),
                                      "--events", (dir / (name + ".events")).string(), "--audit",
                                      (dir / (name + ".audit")).string()};
        args.insert(args.end(), extra.begin(), extra.end());
        return cli(args);
    };
    const auto a = run("a.json", {});
    REQUIRE(a.code == kExitOk);
    REQUIRE(run("b.json", {}).code == kExitOk);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(slurp(dir / "a.json.events") == slurp(dir / "b.json.events"));
    CHECK(slurp(dir / "a.json.audit") == slurp(dir / "b.json.audit"));

    const auto report = nlohmann::json::parse(slurp(dir / "a.json"));
    CHECK(report.at("accuracy") == 1.0);
    CHECK(report.at("total_tokens") == 3 * 77000);
    CHECK(report.at("config").at("rng_seed") == 9);
    CHECK(report.at("judge") == "oracle");
    CHECK(slurp(dir / "a.csv").rfind("problem_id,voted_answer,gold_answer,correct,tokens_consumed", 0) == 0);

    // Scale the baseline so measured / baseline = 0.42 / 3.62.
    const double baseline = 3.0 * 77000.0 * 3.62 / 0.42;
    std::ostringstream b;
    b.precision(17);
    b << baseline;
    REQUIRE(run("c.json", {"--baseline", b.str(), "--csv", (dir / "c_summary.csv").string()}).code == kExitOk);
    const auto csv = slurp(dir / "c_summary.csv");
    CHECK(csv.substr(csv.size() - 7) == ",-88.4\n");

    const auto flagged = run("d.json", {"--K2", "5", "--tau", "0.6", "--adaptive"});
    REQUIRE(flagged.code == kExitOk);
    const auto d = nlohmann::json::parse(slurp(dir / "d.json"));
    CHECK(d.at("config").at("K2") == 5);
    CHECK(d.at("config").at("adaptive_threshold").at("cap") == 0.9);
    CHECK(d.at("config").at("tau") == 0.6);
    CHECK(d.at("total_tokens") == 3 * (64 * 500 + 5 * 4500));

    const auto from_source = run("e.json", {"--baseline-from-source"});
    REQUIRE(from_source.code == kExitOk);
    CHECK(from_source.out.find("delta_token_pct -75.9") != std::string::npos);
}

TEST_CASE("replay runs and report merge") {
    const auto dir = testing::scratch_dir("cli_merge");
    std::string body;
    for (int i = 0; i < 5; ++i) body += replay_line("p1", "t" + std::to_string(i), i < 3 ? "7" : "8");
    for (int i = 0; i < 3; ++i) body += replay_line("p2", "t" + std::to_string(i), "5");
    write(dir / "replay.jsonl", body);
    write(dir / "problems.jsonl",
          "{\"problem_id\":\"p1\",\"question\":\"q\",\"gold_answer\":\"7\"}\n"
          "{\"problem_id\":\"p2\",\"question\":\"q\",\"gold_answer\":\"6\"}\n");
    const auto r = cli({"run", "--source", "replay", "--replay", (dir / "replay.jsonl").string(), "--problems",
                        (dir / "problems.jsonl").string(), "--k", "2", "--baseline", "100", "--out",
                        (dir / "one.json").string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("accuracy 0.5000") != std::string::npos);
    REQUIRE(cli({"run", "--source", "replay", "--replay", (dir / "replay.jsonl").string(), "--problems",
                 (dir / "problems.jsonl").string(), "--k", "2", "--baseline", "300", "--out",
                 (dir / "two.json").string()})
                .code == kExitOk);
    const auto m = cli({"report", "merge", (dir / "one.json").string(), (dir / "two.json").string(), "--out",
                        (dir / "merged.json").string()});
    REQUIRE(m.code == kExitOk);
    const auto merged = nlohmann::json::parse(slurp(dir / "merged.json"));
    CHECK(merged.at("problems").size() == 4);
    CHECK(merged.at("baseline_tokens") == 400.0);
    CHECK(merged.at("accuracy") == 0.5);

    const auto exhausted = cli({"run", "--source", "replay", "--replay", (dir / "replay.jsonl").string(), "--n", "4",
                                "--out", (dir / "x.json").string()});
    CHECK(exhausted.code == kExitData);
    CHECK(cli({"report", "merge", (dir / "absent.json").string(), "--out", (dir / "y.json").string()}).code == kExitData);
}

TEST_CASE("toml subset parser") {
    const auto j = parse_toml(
        "# comment\n"
        "title = \"a # not comment\"\n"
        "n = 1_000\n"
        "x = -2.5e-1\n"
        "ok = true\n"
        "lit = 'C:\\path'\n"
        "arr = [\n  [\"a\", 0.5], # trailing\n  [\"b\", 0.5],\n]\n"
        "[table]\n"
        "inner.key = 3\n"
        "esc = \"tab\\tquote\\\"\"\n");
    CHECK(j.at("title") == "a # not comment");
    CHECK(j.at("n") == 1000);
    CHECK(j.at("x") == -0.25);
    CHECK(j.at("ok") == true);
    CHECK(j.at("lit") == "C:\\path");
    CHECK(j.at("arr").size() == 2);
    CHECK(j.at("arr")[1][0] == "b");
    CHECK(j.at("table").at("inner").at("key") == 3);
    CHECK(j.at("table").at("esc") == "tab\tquote\"");

    for (const char* bad : {"a = ", "a = [1, 2", "= 3", "a = \"open", "[t\na = 1", "a = 1\na = 2"}) {
        try {
            parse_toml(bad);
            FAIL("expected SchemaError for: " << bad);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::SchemaError);
            CHECK(std::string(e.what()).find("config line") != std::string::npos);
        }
    }
    try {
        parse_toml("a = 1\nb = 2\nc = nope\n");
        FAIL("expected SchemaError");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}
