// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/answer.hpp"

#include <cctype>

namespace pruner {

namespace {

using boost::multiprecision::cpp_int;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

// "\boxed{X}" -> "X" when the opening brace closes at the very end.
std::string_view unwrap_command(std::string_view s, std::string_view command) {
    if (!s.starts_with(command) || s.size() < command.size() + 2 || s[command.size()] != '{' || s.back() != '}') {
        return s;
    }
    int depth = 0;
    for (std::size_t i = command.size(); i < s.size(); ++i) {
        if (s[i] == '{') ++depth;
        else if (s[i] == '}' && --depth == 0) {
            if (i != s.size() - 1) return s;
            return s.substr(command.size() + 1, s.size() - command.size() - 2);
        }
    }
    return s;
}

std::string_view strip_dollars(std::string_view s) {
    if (s.size() >= 2 && s.front() == '$' && s.back() == '$') return s.substr(1, s.size() - 2);
    return s;
}

std::string_view strip_period(std::string_view s) {
    if (!s.empty() && s.back() == '.') s.remove_suffix(1);
    return s;
}

// Boost reads a leading 0 as an octal prefix, so drop leading zeros first.
cpp_int from_digits(std::string digits) {
    const auto nonzero = digits.find_first_not_of('0');
    digits.erase(0, nonzero == std::string::npos ? digits.size() : nonzero);
    return digits.empty() ? cpp_int(0) : cpp_int(digits);
}

std::optional<cpp_int> parse_integer(std::string_view s) {
    if (s.empty()) return std::nullopt;
    bool neg = false;
    if (s.front() == '+' || s.front() == '-') {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty()) return std::nullopt;
    // Thousands separators only in the strict d{1,3}(,ddd)+ layout.
    std::string digits;
    if (s.find(',') != std::string_view::npos) {
        std::size_t first = s.find(',');
        if (first == 0 || first > 3) return std::nullopt;
        for (std::size_t i = first; i < s.size(); i += 4) {
            if (s[i] != ',' || i + 4 > s.size()) return std::nullopt;
        }
    }
    for (char c : s) {
        if (c == ',') continue;
        if (!is_digit(c)) return std::nullopt;
        digits += c;
    }
    cpp_int value = from_digits(std::move(digits));
    return neg ? cpp_int(-value) : value;
}

std::optional<Rational> parse_decimal(std::string_view s) {
    bool neg = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    const auto dot = s.find('.');
    if (dot == std::string_view::npos) return std::nullopt;
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    for (char c : whole) if (!is_digit(c)) return std::nullopt;
    for (char c : frac) if (!is_digit(c)) return std::nullopt;
    cpp_int numerator = from_digits(std::string(whole) + std::string(frac));
    cpp_int denominator = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(frac.size()));
    Rational value(numerator, denominator);
    return neg ? Rational(-value) : value;
}

std::optional<Rational> parse_fraction(std::string_view s) {
    const auto slash = s.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto num = parse_integer(trim(s.substr(0, slash)));
    auto den = parse_integer(trim(s.substr(slash + 1)));
    if (!num || !den || *den == 0) return std::nullopt;
    return Rational(*num, *den);
}

// \frac{a}{b}, \dfrac{a}{b}, \tfrac{a}{b} with integer parts.
std::optional<Rational> parse_latex_fraction(std::string_view s) {
    bool neg = false;
    if (!s.empty() && s.front() == '-') {
        neg = true;
        s = trim(s.substr(1));
    }
    for (std::string_view cmd : {"\\frac", "\\dfrac", "\\tfrac"}) {
        if (!s.starts_with(cmd)) continue;
        s.remove_prefix(cmd.size());
        if (s.size() < 4 || s.front() != '{') return std::nullopt;
        const auto mid = s.find("}{");
        if (mid == std::string_view::npos || s.back() != '}') return std::nullopt;
        auto num = parse_integer(trim(s.substr(1, mid - 1)));
        auto den = parse_integer(trim(s.substr(mid + 2, s.size() - mid - 3)));
        if (!num || !den || *den == 0) return std::nullopt;
        Rational value(*num, *den);
        return neg ? Rational(-value) : value;
    }
    return std::nullopt;
}

}  // namespace

std::optional<Rational> parse_numeric(std::string_view text) {
    std::string_view s = trim(text);
    if (s.empty()) return std::nullopt;

    if (s.ends_with("\\%")) {
        auto base = parse_numeric(s.substr(0, s.size() - 2));
        if (base) return *base / 100;
        return std::nullopt;
    }
    if (s.ends_with('%')) {
        auto base = parse_numeric(s.substr(0, s.size() - 1));
        if (base) return *base / 100;
        return std::nullopt;
    }
    if (auto v = parse_integer(s)) return Rational(*v);
    if (auto v = parse_decimal(s)) return v;
    if (auto v = parse_fraction(s)) return v;
    if (auto v = parse_latex_fraction(s)) return v;
    return std::nullopt;
}

NormalizedAnswer normalize_answer(std::string_view raw) {
    std::string_view s = trim(raw);
    s = trim(strip_period(s));
    s = trim(unwrap_command(s, "\\boxed"));
    s = trim(strip_dollars(s));
    s = trim(strip_period(s));

    NormalizedAnswer out;
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.canonical.empty()) out.canonical += ' ';
        pending_space = false;
        out.canonical += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }

    out.numeric = parse_numeric(out.canonical);
    if (out.numeric && denominator(*out.numeric) == 1) out.canonical = numerator(*out.numeric).str();
    return out;
}

int answer_reward(const NormalizedAnswer& a, const NormalizedAnswer& b) {
    if (a.numeric && b.numeric && *a.numeric == *b.numeric) return 1;
    return a.canonical == b.canonical ? 1 : 0;
}

int answer_reward(std::string_view a, std::string_view b) {
    return answer_reward(normalize_answer(a), normalize_answer(b));
}

std::optional<std::string> extract_boxed_answer(std::string_view text) {
    const auto start = text.rfind("\\boxed{");
    if (start == std::string_view::npos) return std::nullopt;
    int depth = 0;
    for (std::size_t i = start + 6; i < text.size(); ++i) {
        if (text[i] == '{') ++depth;
        else if (text[i] == '}' && --depth == 0) return std::string(text.substr(start + 7, i - start - 7));
    }
    return std::nullopt;
}

}  // namespace pruner
