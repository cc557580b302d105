// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <random>

#include "doctest.h"
#include "pruner/errors.hpp"
#include "pruner/truncation.hpp"
#include "testing.hpp"

using namespace pruner;

namespace {

const ReasoningLexicon kThree({"wait", "thus", "since"});

}  // namespace

TEST_CASE("fixed truncation keeps a prefix") {
    const Tokens abcd{"a", "b", "c", "d"};
    CHECK(truncate_fixed(abcd, 3) == Tokens{"a", "b", "c"});
    CHECK(truncate_fixed(Tokens{"a"}, 500) == Tokens{"a"});
    CHECK(truncate_fixed(abcd, 4) == abcd);
    CHECK_THROWS_AS(truncate_fixed(abcd, 0), Error);
}

TEST_CASE("reasoning truncation cuts right after the k-th marker") {
    const Tokens t = tokenize("x y wait a thus b since c");
    CHECK(truncate_reasoning(t, 2, kThree) == tokenize("x y wait a thus"));
    CHECK(truncate_reasoning(tokenize("no markers here"), 25, kThree) == tokenize("no markers here"));
    CHECK(truncate_reasoning(tokenize("a Wait, b"), 1, kThree) == tokenize("a Wait,"));
}

TEST_CASE("marker counting respects word boundaries") {
    CHECK(count_reasoning_words(tokenize("thus thus"), kThree) == 2);
    CHECK(count_reasoning_words(Tokens{}, kThree) == 0);
    CHECK(count_reasoning_words(tokenize("Thursday"), kThree) == 0);
    CHECK(count_reasoning_words(tokenize("(Since) WAIT... thus?"), kThree) == 3);
    CHECK(count_reasoning_words(tokenize("wait-and-see"), kThree) == 0);
}

TEST_CASE("truncation properties over random token streams") {
    std::mt19937_64 gen(11);
    const std::vector<std::string> vocab{"wait", "Thus,", "x", "y", "since.", "z", "So", "hmm"};
    const ReasoningLexicon lex = ReasoningLexicon::defaults();
    for (int trial = 0; trial < 300; ++trial) {
        Tokens t(gen() % 40);
        for (auto& tok : t) tok = vocab[gen() % vocab.size()];
        const std::size_t k = 1 + gen() % 10;

        const Tokens f = truncate_fixed(t, k);
        CHECK(f.size() == std::min(k, t.size()));
        CHECK(std::equal(f.begin(), f.end(), t.begin()));
        CHECK(truncate_fixed(f, k) == f);

        const Tokens r = truncate_reasoning(t, k, lex);
        CHECK(std::equal(r.begin(), r.end(), t.begin()));
        CHECK(count_reasoning_words(r, lex) == std::min(k, count_reasoning_words(t, lex)));
        CHECK(truncate_reasoning(r, k, lex) == r);
    }
}

TEST_CASE("lexicon validation and loading") {
    CHECK_THROWS_AS(ReasoningLexicon({}), Error);
    CHECK_THROWS_AS(ReasoningLexicon({"Wait"}), Error);
    CHECK_THROWS_AS(ReasoningLexicon({"two words"}), Error);
    const auto defaults = ReasoningLexicon::defaults();
    CHECK(defaults.words().size() == 11);
    CHECK(defaults.matches("However,"));
    CHECK_FALSE(defaults.matches("x"));

    const auto dir = testing::scratch_dir("lexicon");
    {
        std::ofstream f(dir / "lex.txt");
        f << "# markers\nwait\n\nthus\n";
    }
    const auto loaded = ReasoningLexicon::load(dir / "lex.txt");
    CHECK(loaded.words() == std::set<std::string, std::less<>>{"thus", "wait"});
    CHECK(loaded.fingerprint() == ReasoningLexicon({"wait", "thus"}).fingerprint());
    CHECK(loaded.fingerprint() != defaults.fingerprint());
    try {
        ReasoningLexicon::load(dir / "missing.txt");
        FAIL("expected FileNotFound");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::FileNotFound);
    }
}

TEST_CASE("pause detector agrees with offline truncation") {
    const Tokens t = tokenize("a wait b c thus d since e f");
    for (auto mode : {TruncationMode::fixed_tokens(4), TruncationMode::reasoning_words(2)}) {
        PauseDetector d(mode, kThree);
        std::size_t paused_at = 0;
        for (const auto& tok : t) {
            if (d.push(tok)) {
                paused_at = d.tokens_seen();
                break;
            }
        }
        CHECK(paused_at == truncate(t, mode, kThree).size());
    }
}
