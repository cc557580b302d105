// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "pruner/errors.hpp"

namespace pruner {

/// Calls fn(object, line_number) for every non-blank line. Parse failures and
/// SchemaErrors thrown by fn are rethrown with "path:line" prepended.
template <class Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileNotFound, path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::SchemaError, where + e.what());
        }
        try {
            fn(j, line_no);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SchemaError) throw;
            throw Error(ErrorKind::SchemaError, where + e.detail());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::SchemaError, where + e.what());
        }
    }
}

}  // namespace pruner
