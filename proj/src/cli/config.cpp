// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "pruner/errors.hpp"

namespace pruner {

namespace {

class TomlParser {
public:
    explicit TomlParser(std::string_view text) : s_(text) {}

    nlohmann::json parse() {
        nlohmann::json root = nlohmann::json::object();
        nlohmann::json* table = &root;
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                ++pos_;
                skip_inline_space();
                std::vector<std::string> path = parse_key_path();
                skip_inline_space();
                expect(']');
                table = &root;
                for (const auto& part : path) {
                    nlohmann::json& next = (*table)[part];
                    if (next.is_null()) next = nlohmann::json::object();
                    if (!next.is_object()) fail("'" + part + "' is already a value");
                    table = &next;
                }
            } else {
                std::vector<std::string> path = parse_key_path();
                skip_inline_space();
                expect('=');
                skip_inline_space();
                nlohmann::json value = parse_value();
                nlohmann::json* target = table;
                for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                    nlohmann::json& next = (*target)[path[i]];
                    if (next.is_null()) next = nlohmann::json::object();
                    if (!next.is_object()) fail("'" + path[i] + "' is already a value");
                    target = &next;
                }
                if (target->contains(path.back())) fail("duplicate key '" + path.back() + "'");
                (*target)[path.back()] = std::move(value);
            }
            end_of_line();
        }
        return root;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[pos_]; }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::SchemaError, "config line " + std::to_string(line_) + ": " + what);
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_inline_space() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_comment() {
        if (peek() == '#') {
            while (!eof() && peek() != '\n') ++pos_;
        }
    }

    void skip_blank_lines() {
        while (!eof()) {
            skip_inline_space();
            skip_comment();
            if (peek() == '\r') ++pos_;
            if (peek() == '\n') {
                ++pos_;
                ++line_;
                continue;
            }
            break;
        }
    }

    // Whitespace, comments and newlines inside arrays.
    void skip_any_space() {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') ++pos_;
            else if (c == '\n') {
                ++pos_;
                ++line_;
            } else if (c == '#') skip_comment();
            else break;
        }
    }

    void end_of_line() {
        skip_inline_space();
        skip_comment();
        if (peek() == '\r') ++pos_;
        if (eof()) return;
        if (peek() != '\n') fail("unexpected trailing content");
        ++pos_;
        ++line_;
    }

    std::string parse_key() {
        if (peek() == '"' || peek() == '\'') return parse_string();
        std::string key;
        while (!eof()) {
            const char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
                key += c;
                ++pos_;
            } else {
                break;
            }
        }
        if (key.empty()) fail("expected a key");
        return key;
    }

    std::vector<std::string> parse_key_path() {
        std::vector<std::string> path{parse_key()};
        skip_inline_space();
        while (peek() == '.') {
            ++pos_;
            skip_inline_space();
            path.push_back(parse_key());
            skip_inline_space();
        }
        return path;
    }

    std::string parse_string() {
        const char quote = peek();
        ++pos_;
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = s_[pos_++];
            if (c == quote) break;
            if (c == '\\' && quote == '"') {
                if (eof()) fail("unterminated escape");
                const char e = s_[pos_++];
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
                continue;
            }
            out += c;
        }
        return out;
    }

    nlohmann::json parse_value() {
        const char c = peek();
        if (c == '"' || c == '\'') return parse_string();
        if (c == '[') return parse_array();
        std::string word;
        while (!eof()) {
            const char d = peek();
            if (d == ',' || d == ']' || d == '#' || d == '\n' || d == '\r' || d == ' ' || d == '\t') break;
            word += d;
            ++pos_;
        }
        if (word == "true") return true;
        if (word == "false") return false;
        if (word.empty()) fail("expected a value");
        return parse_number(word);
    }

    nlohmann::json parse_number(const std::string& word) {
        std::string cleaned;
        for (char d : word) {
            if (d != '_') cleaned += d;
        }
        const bool floating = cleaned.find_first_of(".eE") != std::string::npos || cleaned == "inf" ||
                              cleaned == "+inf" || cleaned == "nan";
        const char* first = cleaned.data() + (cleaned.starts_with('+') ? 1 : 0);
        const char* last = cleaned.data() + cleaned.size();
        if (!floating) {
            long long v = 0;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec == std::errc() && ptr == last) return v;
        } else {
            double v = 0;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec == std::errc() && ptr == last) return v;
        }
        fail("cannot parse value '" + word + "'");
    }

    nlohmann::json parse_array() {
        expect('[');
        nlohmann::json arr = nlohmann::json::array();
        skip_any_space();
        while (peek() != ']') {
            if (eof()) fail("unterminated array");
            arr.push_back(parse_value());
            skip_any_space();
            if (peek() == ',') {
                ++pos_;
                skip_any_space();
            } else if (peek() != ']') {
                fail("expected ',' or ']' in array");
            }
        }
        ++pos_;
        return arr;
    }
};

}  // namespace

nlohmann::json parse_toml(std::string_view text) { return TomlParser(text).parse(); }

nlohmann::json load_toml(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileNotFound, path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_toml(buf.str());
}

}  // namespace pruner
