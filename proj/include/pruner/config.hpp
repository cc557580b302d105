// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string_view>

#include "json.hpp"

namespace pruner {

/// Parses the TOML subset used by run configs into a JSON object: [table] and
/// [dotted.table] headers, bare or quoted keys, basic and literal strings,
/// integers (with '_' separators), floats, booleans, and arrays of those
/// (nested arrays included, may span lines). '#' starts a comment outside
/// strings. Anything else throws Error(SchemaError) naming the line.
nlohmann::json parse_toml(std::string_view text);

/// Reads and parses a file. Throws Error(FileNotFound) if it cannot be opened.
nlohmann::json load_toml(const std::filesystem::path& path);

}  // namespace pruner
