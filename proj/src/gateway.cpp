#include "duologue/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"

namespace duologue::gateway {

using nlohmann::json;
using nlohmann::ordered_json;

const char* chat_error_kind_name(ChatErrorKind kind) {
    switch (kind) {
        case ChatErrorKind::Auth: return "auth";
        case ChatErrorKind::RateLimited: return "rate_limited";
        case ChatErrorKind::Transport: return "transport";
        case ChatErrorKind::MalformedResponse: return "malformed_response";
    }
    return "transport";
}

std::optional<std::string> credential_from_env(const std::string& env_name) {
    const char* v = std::getenv(env_name.c_str());
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint must start with http:// or https://: " + endpoint);
    std::string scheme = endpoint.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw ConfigError("endpoint must start with http:// or https://: " + endpoint);
    auto path_start = endpoint.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? endpoint : endpoint.substr(0, path_start);
    if (base.size() == scheme_end + 3)
        throw ConfigError("endpoint is missing a host: " + endpoint);
    std::string path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
    return {base, path};
}

std::optional<json> extract_trailing_json(const std::string& text) {
    std::size_t best_start = std::string::npos;
    std::size_t best_end = 0;
    std::optional<json> best;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        std::size_t end = std::string::npos;
        for (std::size_t j = i; j < text.size(); ++j) {
            char c = text[j];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    end = j + 1;
                    break;
                }
            }
        }
        if (end == std::string::npos) continue;
        if (end < best_end || (end == best_end && i > best_start)) continue;
        json parsed = json::parse(text.substr(i, end - i), nullptr, false);
        if (parsed.is_discarded()) continue;
        best_start = i;
        best_end = end;
        best = std::move(parsed);
    }
    return best;
}

HttpChatClient::HttpChatClient(LlmSettings settings)
    : settings_(std::move(settings)),
      slots_(std::min<std::ptrdiff_t>(settings_.max_in_flight, 256)) {
    std::tie(base_url_, path_) = split_endpoint(settings_.endpoint);
}

HttpChatClient::~HttpChatClient() = default;

ChatOutcome HttpChatClient::complete(const std::string& prompt, double temperature,
                                     std::uint64_t seed) {
    auto key = credential_from_env(settings_.api_key_env);
    if (!key) {
        ChatOutcome out{"", ChatError{ChatErrorKind::Auth,
                                      "credential environment variable " + settings_.api_key_env +
                                          " is unset or empty"}};
        journal(prompt, out);
        return out;
    }

    slots_.acquire();
    struct Release {
        std::counting_semaphore<256>& s;
        ~Release() { s.release(); }
    } release{slots_};

    const json payload = {
        {"model", settings_.model},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
        {"temperature", temperature},
        {"seed", seed},
    };
    const std::string body = payload.dump();

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - t0).count();
    };

    ChatOutcome last{"", ChatError{ChatErrorKind::Transport, "request deadline is zero"}};
    for (int attempt = 1; attempt <= settings_.max_attempts; ++attempt) {
        if (attempt > 1) {
            long long wait = static_cast<long long>(settings_.backoff_base_ms) << (attempt - 2);
            long long remaining = settings_.deadline_ms - elapsed_ms();
            if (remaining <= 0) break;
            std::this_thread::sleep_for(std::chrono::milliseconds(std::min(wait, remaining)));
        }
        long long remaining = settings_.deadline_ms - elapsed_ms();
        if (remaining <= 0) break;

        httplib::Client client(base_url_);
        client.set_connection_timeout(std::chrono::milliseconds(remaining));
        client.set_read_timeout(std::chrono::milliseconds(remaining));
        client.set_write_timeout(std::chrono::milliseconds(remaining));
        client.set_bearer_token_auth(*key);

        auto res = client.Post(path_, body, "application/json");
        if (!res) {
            last = {"", ChatError{ChatErrorKind::Transport,
                                  std::string("transport failure: ") + httplib::to_string(res.error())}};
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            last = {res->body, ChatError{ChatErrorKind::Auth,
                                         "endpoint rejected the credential (HTTP " +
                                             std::to_string(res->status) + ")"}};
            break;
        }
        if (res->status == 429) {
            last = {res->body, ChatError{ChatErrorKind::RateLimited, "rate limited (HTTP 429)"}};
            continue;
        }
        if (res->status >= 500) {
            last = {res->body, ChatError{ChatErrorKind::Transport,
                                         "server error (HTTP " + std::to_string(res->status) + ")"}};
            continue;
        }
        if (res->status != 200) {
            last = {res->body, ChatError{ChatErrorKind::Transport,
                                         "unexpected HTTP " + std::to_string(res->status)}};
            break;
        }
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
            parsed["choices"].empty() || !parsed["choices"][0].contains("message") ||
            !parsed["choices"][0]["message"].contains("content") ||
            !parsed["choices"][0]["message"]["content"].is_string()) {
            last = {res->body, ChatError{ChatErrorKind::MalformedResponse,
                                         "response body is not a chat completion"}};
            break;
        }
        last = {parsed["choices"][0]["message"]["content"].get<std::string>(), std::nullopt};
        break;
    }
    journal(prompt, last);
    return last;
}

void HttpChatClient::journal(const std::string& prompt, const ChatOutcome& outcome) {
    if (settings_.journal_path.empty()) return;
    ordered_json line;
    line["prompt"] = prompt;
    if (outcome.ok()) {
        line["text"] = outcome.text;
    } else {
        line["error"] = {{"kind", chat_error_kind_name(outcome.error->kind)},
                         {"message", outcome.error->message}};
        if (!outcome.text.empty()) line["body"] = outcome.text;
    }
    std::lock_guard lock(journal_mu_);
    std::ofstream f(settings_.journal_path, std::ios::app);
    f << line.dump() << "\n";
}

}  // namespace duologue::gateway
