// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace pruner {

using Rational = boost::multiprecision::cpp_rational;

/// A final answer reduced to a comparable form. `numeric` is set when the
/// cleaned text is an integer, decimal, percentage or simple fraction.
struct NormalizedAnswer {
    std::string canonical;
    std::optional<Rational> numeric;
};

/// Trims, unwraps one \boxed{...} and one $...$, drops a trailing period,
/// lowercases and collapses whitespace, then tries the numeric forms. Integer
/// values get the plain decimal rendering as canonical text ("042" -> "42").
NormalizedAnswer normalize_answer(std::string_view raw);

std::optional<Rational> parse_numeric(std::string_view text);

/// Rule-based answer equivalence: exact rational equality when both sides are
/// numeric, normalized string equality otherwise. Symmetric and reflexive.
int answer_reward(std::string_view a, std::string_view b);
int answer_reward(const NormalizedAnswer& a, const NormalizedAnswer& b);

/// Contents of the last \boxed{...} in a completion, if any.
std::optional<std::string> extract_boxed_answer(std::string_view text);

}  // namespace pruner
