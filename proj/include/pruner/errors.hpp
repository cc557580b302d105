// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pruner {

enum class ErrorKind {
    InvalidArgument,
    IllegalTransition,
    MissingGroundTruth,
    Transport,
    Timeout,
    UnparseableVerdict,
    SingleClassDataset,
    AlreadyTerminated,
    EmptyState,
    EmptyAnswerList,
    SourceExhausted,
    JudgeFailure,
    InvalidDistribution,
    EmptyPairSet,
    SingleClass,
    LengthMismatch,
    ZeroBaseline,
    FileNotFound,
    SchemaError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure surfaced by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit code without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

}  // namespace pruner
