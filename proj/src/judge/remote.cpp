// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include "pruner/remote.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <semaphore>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "pruner/errors.hpp"

namespace pruner {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

void replace_all(std::string& text, std::string_view from, std::string_view to) {
    for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
        text.replace(pos, from.size(), to);
    }
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

// Transport failure that will not improve on retry (HTTP 4xx other than
// 408/429). Still reported to callers as ErrorKind::Transport.
struct FatalTransport : Error {
    explicit FatalTransport(const std::string& message) : Error(ErrorKind::Transport, message) {}
};

}  // namespace

EndpointConfig EndpointConfig::from_env() {
    EndpointConfig config;
    if (const char* url = std::getenv("PRUNER_ENDPOINT")) config.base_url = url;
    if (const char* key = std::getenv("PRUNER_API_KEY")) config.api_key = key;
    return config;
}

JudgePromptTemplate JudgePromptTemplate::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileNotFound, path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    JudgePromptTemplate out;
    if (const auto sep = text.find("\n---\n"); sep != std::string::npos) {
        out.system = std::string(trim(std::string_view(text).substr(0, sep)));
        text = text.substr(sep + 5);
    }
    out.user = std::string(trim(text));
    if (out.user.find("{left}") == std::string::npos || out.user.find("{right}") == std::string::npos) {
        throw Error(ErrorKind::SchemaError, "judge template must contain {left} and {right}");
    }
    return out;
}

std::string JudgePromptTemplate::render_user(std::string_view left, std::string_view right) const {
    // Substitute through a placeholder so a segment containing "{right}" is not
    // expanded a second time.
    std::string text = user;
    replace_all(text, "{left}", "\x01L\x01");
    replace_all(text, "{right}", "\x01R\x01");
    replace_all(text, "\x01L\x01", left);
    replace_all(text, "\x01R\x01", right);
    return text;
}

nlohmann::json build_judge_request(const JudgePromptTemplate& prompt, std::string_view model, std::string_view left,
                                   std::string_view right) {
    return nlohmann::json{{"model", model},
                          {"temperature", 0},
                          {"messages",
                           nlohmann::json::array({{{"role", "system"}, {"content", prompt.system}},
                                                  {{"role", "user"}, {"content", prompt.render_user(left, right)}}})}};
}

double parse_verdict(std::string_view content) {
    std::string_view s = trim(content);
    while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back())) && s.back() != '.') s.remove_suffix(1);
    std::string upper(s);
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    while (!upper.empty() && upper.back() == '.') upper.pop_back();
    if (upper == "SAME") return 1.0;
    if (upper == "DIFFERENT") return 0.0;

    double p = 0.0;
    const char* first = upper.data();
    const char* last = upper.data() + upper.size();
    auto [ptr, ec] = std::from_chars(first, last, p);
    if (ec == std::errc() && ptr == last && p >= 0.0 && p <= 1.0) return p;
    throw Error(ErrorKind::UnparseableVerdict, "'" + std::string(content) + "'");
}

// ---------------------------------------------------------------------------
// ChatClient
// ---------------------------------------------------------------------------

struct ChatClient::Gate {
    explicit Gate(std::size_t n) : slots(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, std::min<std::size_t>(n, 1024)))) {}
    std::counting_semaphore<1024> slots;
};

namespace {

class GateLease {
public:
    explicit GateLease(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
    ~GateLease() { s_.release(); }
    GateLease(const GateLease&) = delete;
    GateLease& operator=(const GateLease&) = delete;

private:
    std::counting_semaphore<1024>& s_;
};

httplib::Headers auth_headers(const EndpointConfig& config) {
    httplib::Headers headers;
    if (config.api_key) headers.emplace("Authorization", "Bearer " + *config.api_key);
    return headers;
}

void configure(httplib::Client& client, const EndpointConfig& config) {
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
}

// Runs `attempt` until it succeeds, fails with a non-retryable error, or the
// retry budget is spent.
template <typename F>
auto with_retries(const EndpointConfig& config, F&& attempt) {
    auto delay = config.backoff_initial;
    for (int i = 0;; ++i) {
        try {
            return attempt();
        } catch (const FatalTransport&) {
            throw;
        } catch (const Error& e) {
            const bool retryable = e.kind() == ErrorKind::Transport || e.kind() == ErrorKind::Timeout;
            if (!retryable || i >= config.max_retries) throw;
        }
        std::this_thread::sleep_for(delay);
        delay = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(delay.count()) * config.backoff_factor));
    }
}

[[noreturn]] void raise_transport(httplib::Error err, std::chrono::steady_clock::time_point started,
                                  const EndpointConfig& config) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (err == httplib::Error::ConnectionTimeout || elapsed >= config.timeout) {
        throw Error(ErrorKind::Timeout, config.base_url + config.path);
    }
    throw Error(ErrorKind::Transport, config.base_url + config.path + ": " + httplib::to_string(err));
}

}  // namespace

ChatClient::ChatClient(EndpointConfig config)
    : config_(std::move(config)), gate_(std::make_unique<Gate>(config_.max_concurrency)) {
    if (config_.base_url.empty()) throw Error(ErrorKind::InvalidArgument, "endpoint base URL is empty (set PRUNER_ENDPOINT)");
}

ChatClient::~ChatClient() = default;

nlohmann::json ChatClient::post(const nlohmann::json& body) const {
    GateLease lease(gate_->slots);
    const std::string payload = body.dump();
    return with_retries(config_, [&]() -> nlohmann::json {
        httplib::Client client(config_.base_url);
        configure(client, config_);
        const auto started = std::chrono::steady_clock::now();
        auto res = client.Post(config_.path, auth_headers(config_), payload, "application/json");
        if (!res) raise_transport(res.error(), started, config_);
        if (res->status != 200) {
            const std::string msg = "HTTP " + std::to_string(res->status) + " from " + config_.base_url;
            if (retryable_status(res->status)) throw Error(ErrorKind::Transport, msg);
            throw FatalTransport(msg);
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorKind::Transport, "malformed JSON response body");
        }
    });
}

void ChatClient::stream(const nlohmann::json& body, const std::function<bool(std::string_view)>& on_delta) const {
    GateLease lease(gate_->slots);
    nlohmann::json streaming = body;
    streaming["stream"] = true;
    const std::string payload = streaming.dump();

    with_retries(config_, [&]() {
        httplib::Client client(config_.base_url);
        configure(client, config_);

        std::string pending;
        bool stopped = false;
        bool delivered = false;
        httplib::Request req;
        req.method = "POST";
        req.path = config_.path;
        req.headers = auth_headers(config_);
        req.headers.emplace("Accept", "text/event-stream");
        req.body = payload;
        req.set_header("Content-Type", "application/json");
        req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t, std::uint64_t) {
            pending.append(data, len);
            std::size_t nl;
            while ((nl = pending.find('\n')) != std::string::npos) {
                std::string line = pending.substr(0, nl);
                pending.erase(0, nl + 1);
                std::string_view l = trim(line);
                if (!l.starts_with("data:")) continue;
                l = trim(l.substr(5));
                if (l == "[DONE]") return true;
                nlohmann::json chunk = nlohmann::json::parse(l, nullptr, false);
                if (chunk.is_discarded()) continue;
                const auto& choices = chunk.value("choices", nlohmann::json::array());
                if (choices.empty()) continue;
                const auto& delta = choices[0].value("delta", nlohmann::json::object());
                if (!delta.contains("content") || !delta["content"].is_string()) continue;
                delivered = true;
                if (!on_delta(delta["content"].get_ref<const std::string&>())) {
                    stopped = true;
                    return false;
                }
            }
            return true;
        };

        httplib::Response res;
        httplib::Error err = httplib::Error::Success;
        const auto started = std::chrono::steady_clock::now();
        const bool ok = client.send(req, res, err);
        if (stopped) return 0;
        // A partially delivered stream cannot be replayed without duplicating
        // tokens downstream, so it is not retried.
        if (!ok && delivered) throw Error(ErrorKind::JudgeFailure, "stream interrupted after partial delivery");
        if (!ok) raise_transport(err, started, config_);
        if (res.status != 200) {
            const std::string msg = "HTTP " + std::to_string(res.status) + " from " + config_.base_url;
            if (retryable_status(res.status)) throw Error(ErrorKind::Transport, msg);
            throw FatalTransport(msg);
        }
        return 0;
    });
}

// ---------------------------------------------------------------------------
// RemoteJudge
// ---------------------------------------------------------------------------

RemoteJudge::RemoteJudge(EndpointConfig endpoint, JudgePromptTemplate prompt)
    : client_(std::move(endpoint)), prompt_(std::move(prompt)) {}

Verdict RemoteJudge::judge(const Segment& left, const Segment& right) const {
    const auto request =
        build_judge_request(prompt_, client_.config().model, join_tokens(left.tokens), join_tokens(right.tokens));
    const auto response = client_.post(request);

    std::string content;
    try {
        content = response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::UnparseableVerdict, "response carries no message content");
    }
    const double p = parse_verdict(content);

    std::uint64_t tokens = 0;
    if (response.contains("usage") && response["usage"].contains("total_tokens")) {
        tokens = response["usage"]["total_tokens"].get<std::uint64_t>();
    } else {
        tokens = tokenize(request["messages"][0]["content"].get<std::string>()).size() +
                 tokenize(request["messages"][1]["content"].get<std::string>()).size();
    }
    return {JudgeScore(p), tokens};
}

}  // namespace pruner
