// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/truncation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "pruner/errors.hpp"
#include "pruner/rng.hpp"

namespace pruner {

namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string normalize_marker(std::string_view token) {
    std::size_t begin = 0;
    std::size_t end = token.size();
    while (begin < end && is_punct(token[begin])) ++begin;
    while (end > begin && is_punct(token[end - 1])) --end;
    std::string out(token.substr(begin, end - begin));
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

ReasoningLexicon::ReasoningLexicon(std::set<std::string, std::less<>> words) : words_(std::move(words)) {
    if (words_.empty()) throw Error(ErrorKind::InvalidArgument, "reasoning lexicon is empty");
    for (const auto& w : words_) {
        const bool ok = !w.empty() && std::none_of(w.begin(), w.end(), [](char c) {
            auto u = static_cast<unsigned char>(c);
            return std::isspace(u) || std::isupper(u);
        });
        if (!ok) throw Error(ErrorKind::InvalidArgument, "lexicon entry '" + w + "' must be lowercase without whitespace");
    }
}

ReasoningLexicon ReasoningLexicon::defaults() {
    return ReasoningLexicon({"wait", "thus", "since", "so", "because", "therefore", "alternatively", "but",
                             "however", "check", "hmm"});
}

ReasoningLexicon ReasoningLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileNotFound, path.string());
    std::set<std::string, std::less<>> words;
    std::string line;
    while (std::getline(in, line)) {
        auto toks = tokenize(line);
        if (toks.empty() || toks.front().starts_with('#')) continue;
        if (toks.size() > 1) throw Error(ErrorKind::SchemaError, "lexicon line holds more than one word: " + line);
        words.insert(toks.front());
    }
    return ReasoningLexicon(std::move(words));
}

bool ReasoningLexicon::matches(std::string_view token) const {
    // Cheap reject before allocating: markers are short words.
    if (token.empty() || token.size() > 64) return false;
    return words_.find(normalize_marker(token)) != words_.end();
}

std::uint64_t ReasoningLexicon::fingerprint() const noexcept {
    std::uint64_t h = fnv1a64("");
    for (const auto& w : words_) {
        h = fnv1a64(w, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

Tokens truncate_fixed(std::span<const std::string> tokens, std::size_t k) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
    const std::size_t n = std::min(k, tokens.size());
    return Tokens(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n));
}

Tokens truncate_reasoning(std::span<const std::string> tokens, std::size_t k, const ReasoningLexicon& lexicon) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
    std::size_t seen = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (lexicon.matches(tokens[i]) && ++seen == k) {
            return Tokens(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(i + 1));
        }
    }
    return Tokens(tokens.begin(), tokens.end());
}

std::size_t count_reasoning_words(std::span<const std::string> tokens, const ReasoningLexicon& lexicon) {
    return static_cast<std::size_t>(
        std::count_if(tokens.begin(), tokens.end(), [&](const std::string& t) { return lexicon.matches(t); }));
}

Tokens truncate(std::span<const std::string> tokens, const TruncationMode& mode, const ReasoningLexicon& lexicon) {
    return mode.kind == TruncationKind::FixedTokens ? truncate_fixed(tokens, mode.k)
                                                    : truncate_reasoning(tokens, mode.k, lexicon);
}

PauseDetector::PauseDetector(TruncationMode mode, const ReasoningLexicon& lexicon)
    : mode_(mode), lexicon_(&lexicon) {
    if (mode_.k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
}

bool PauseDetector::push(std::string_view token) {
    if (reached_) return true;
    ++seen_;
    if (mode_.kind == TruncationKind::FixedTokens) {
        reached_ = seen_ >= mode_.k;
    } else if (lexicon_->matches(token)) {
        reached_ = ++markers_ >= mode_.k;
    }
    return reached_;
}

}  // namespace pruner
