// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "pruner/judge.hpp"

namespace pruner {

/// Where and how to reach an OpenAI-chat-compatible backend.
struct EndpointConfig {
    std::string base_url;  // scheme://host:port
    std::string path = "/v1/chat/completions";
    std::string model;
    std::optional<std::string> api_key;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 3;
    std::chrono::milliseconds backoff_initial{250};
    double backoff_factor = 2.0;
    std::size_t max_concurrency = 4;

    /// base_url from the PRUNER_ENDPOINT environment variable, if set.
    static EndpointConfig from_env();
};

inline constexpr std::string_view kDefaultJudgeSystemPrompt =
    "You compare two partial chains of thought written for the same problem and predict whether they will "
    "end with the same final answer. Reply with exactly one word: SAME or DIFFERENT.";

inline constexpr std::string_view kDefaultJudgeUserTemplate =
    "Trace A:\n{left}\n\nTrace B:\n{right}\n\nWill these two unfinished reasoning traces reach the same final "
    "answer? Answer SAME or DIFFERENT.";

struct JudgePromptTemplate {
    std::string system{kDefaultJudgeSystemPrompt};
    std::string user{kDefaultJudgeUserTemplate};

    /// Reads a file holding the user template; an optional first block up to a
    /// line containing only "---" replaces the system instruction.
    static JudgePromptTemplate load(const std::filesystem::path& path);
    std::string render_user(std::string_view left, std::string_view right) const;
};

/// Request body for one judge call (temperature 0).
nlohmann::json build_judge_request(const JudgePromptTemplate& prompt, std::string_view model, std::string_view left,
                                   std::string_view right);

/// SAME -> 1, DIFFERENT -> 0 (any case, surrounding punctuation ignored), or a
/// bare probability in [0,1]. Anything else is Error(UnparseableVerdict).
double parse_verdict(std::string_view content);

/// POST with retry and exponential backoff. Transport and Timeout failures are
/// retried; the last one is rethrown once retries run out.
class ChatClient {
public:
    explicit ChatClient(EndpointConfig config);
    ~ChatClient();
    ChatClient(const ChatClient&) = delete;
    ChatClient& operator=(const ChatClient&) = delete;

    nlohmann::json post(const nlohmann::json& body) const;

    /// Streams server-sent events; `on_delta` receives each content fragment
    /// and returns false to stop the stream early.
    void stream(const nlohmann::json& body, const std::function<bool(std::string_view)>& on_delta) const;

    const EndpointConfig& config() const noexcept { return config_; }

private:
    struct Gate;
    EndpointConfig config_;
    std::unique_ptr<Gate> gate_;
};

/// Judge backed by a chat-completions endpoint.
class RemoteJudge final : public Judge {
public:
    RemoteJudge(EndpointConfig endpoint, JudgePromptTemplate prompt = {});

    Verdict judge(const Segment& left, const Segment& right) const override;
    std::string_view name() const noexcept override { return "remote"; }

private:
    ChatClient client_;
    JudgePromptTemplate prompt_;
};

}  // namespace pruner
