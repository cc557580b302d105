// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "pruner/core.hpp"

namespace pruner {

/// Marker words that delimit reasoning steps ("wait", "thus", ...).
class ReasoningLexicon {
public:
    /// Throws Error(InvalidArgument) if empty or any entry is not a lowercase,
    /// whitespace-free word.
    explicit ReasoningLexicon(std::set<std::string, std::less<>> words);

    static ReasoningLexicon defaults();
    /// One word per line; blank lines and lines starting with '#' are skipped.
    static ReasoningLexicon load(const std::filesystem::path& path);

    /// True if the token, lowercased with surrounding ASCII punctuation
    /// stripped, is a lexicon word.
    bool matches(std::string_view token) const;

    const std::set<std::string, std::less<>>& words() const noexcept { return words_; }
    /// Stable fingerprint of the word set, persisted alongside trained judges.
    std::uint64_t fingerprint() const noexcept;

private:
    std::set<std::string, std::less<>> words_;
};

/// Lowercase with leading/trailing ASCII punctuation removed.
std::string normalize_marker(std::string_view token);

Tokens truncate_fixed(std::span<const std::string> tokens, std::size_t k);

/// Prefix ending at the token carrying the k-th lexicon occurrence, or the
/// whole sequence if there are fewer than k occurrences.
Tokens truncate_reasoning(std::span<const std::string> tokens, std::size_t k, const ReasoningLexicon& lexicon);

std::size_t count_reasoning_words(std::span<const std::string> tokens, const ReasoningLexicon& lexicon);

Tokens truncate(std::span<const std::string> tokens, const TruncationMode& mode, const ReasoningLexicon& lexicon);

/// Incremental form of the truncation rule for streaming generation.
class PauseDetector {
public:
    PauseDetector(TruncationMode mode, const ReasoningLexicon& lexicon);

    /// Feeds the next emitted token; returns true once the pause point has been
    /// reached (inclusive of this token).
    bool push(std::string_view token);
    bool reached() const noexcept { return reached_; }
    std::size_t tokens_seen() const noexcept { return seen_; }

private:
    TruncationMode mode_;
    const ReasoningLexicon* lexicon_;
    std::size_t seen_ = 0;
    std::size_t markers_ = 0;
    bool reached_ = false;
};

}  // namespace pruner
