#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>

#include "duologue/core.hpp"
#include "json.hpp"

namespace duologue::gateway {

enum class ChatErrorKind { Auth, RateLimited, Transport, MalformedResponse };

const char* chat_error_kind_name(ChatErrorKind kind);

struct ChatError {
    ChatErrorKind kind = ChatErrorKind::Transport;
    std::string message;
};

// Result of one completion request. `error` empty means `text` is the
// assistant message; on failure `text` is whatever partial body we got.
struct ChatOutcome {
    std::string text;
    std::optional<ChatError> error;

    bool ok() const { return !error.has_value(); }
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatOutcome complete(const std::string& prompt, double temperature,
                                 std::uint64_t seed) = 0;
};

// Deterministic in-process stand-in: delegates to a pure function of
// (prompt, seed) and never fails.
class MockChatClient final : public ChatClient {
public:
    using Fn = std::function<std::string(const std::string&, std::uint64_t)>;

    explicit MockChatClient(Fn fn) : fn_(std::move(fn)) {}

    ChatOutcome complete(const std::string& prompt, double /*temperature*/,
                         std::uint64_t seed) override {
        return {fn_(prompt, seed), std::nullopt};
    }

private:
    Fn fn_;
};

// Talks to an OpenAI-style chat completion endpoint. Reads the credential
// from the environment variable named in settings (never from a flag or a
// file), bounds concurrency with a semaphore, retries transient failures
// (timeouts, 429, 5xx) with exponential backoff, and gives up once the
// per-request deadline has elapsed.
class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(LlmSettings settings);
    ~HttpChatClient() override;

    ChatOutcome complete(const std::string& prompt, double temperature,
                         std::uint64_t seed) override;

private:
    void journal(const std::string& prompt, const ChatOutcome& outcome);

    LlmSettings settings_;
    std::string base_url_;  // scheme://host[:port]
    std::string path_;      // /v1/chat/completions
    std::counting_semaphore<256> slots_;
    std::mutex journal_mu_;
};

// Reads the credential for `env_name`; unset or empty both count as absent.
std::optional<std::string> credential_from_env(const std::string& env_name);

// Splits "scheme://host[:port]/path" into base ("scheme://host[:port]") and
// path ("/path", "/" when absent). Throws ConfigError on anything else.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint);

// Finds the last complete JSON object in free-form model output: the
// candidate whose closing brace sits furthest right wins, and among
// candidates that close at the same spot the one that opens earliest.
// Brace matching is string-aware, so braces inside JSON strings don't count.
std::optional<nlohmann::json> extract_trailing_json(const std::string& text);

}  // namespace duologue::gateway
