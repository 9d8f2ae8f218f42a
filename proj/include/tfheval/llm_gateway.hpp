#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tfheval {

class HttpTransport;

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view name);

struct Message {
    Role role;
    std::string text;

    bool operator==(const Message&) const = default;
};

/// Ordered chat history. Any number of leading system messages, then strictly
/// alternating user/assistant turns starting with a user turn.
class Conversation {
public:
    Conversation() = default;

    void add_system(std::string text);
    void add_user(std::string text);
    void add_assistant(std::string text);

    const std::vector<Message>& messages() const noexcept { return messages_; }
    bool empty() const noexcept { return messages_.empty(); }
    std::size_t size() const noexcept { return messages_.size(); }

    /// Concatenation of all system messages, separated by blank lines.
    std::string system_text() const;

    /// Throws std::invalid_argument when the ordering invariant does not hold
    /// or the conversation is empty.
    void validate() const;

    /// Copy that keeps the system messages, the first user turn and the last
    /// `exchanges` (assistant, user) pairs.
    Conversation keep_last_exchanges(std::size_t exchanges) const;

    bool operator==(const Conversation&) const = default;

private:
    void push(Role role, std::string text);

    std::vector<Message> messages_;
};

struct Usage {
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;

    Usage& operator+=(const Usage& other) noexcept {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        return *this;
    }
    friend Usage operator+(Usage lhs, const Usage& rhs) noexcept { return lhs += rhs; }
    bool operator==(const Usage&) const = default;
};

enum class ProviderKind { openai_style, anthropic_style, mock };

std::string_view to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(std::string_view name);

struct ModelConfig {
    std::string model_id;
    ProviderKind provider_kind = ProviderKind::mock;
    std::string endpoint;
    /// Name of the environment variable holding the API key. Never the key.
    std::string credential_ref;
    double temperature = 0.9;
    double top_p = 0.85;
    std::uint32_t max_output_tokens = 2048;
    std::chrono::milliseconds request_timeout{std::chrono::seconds(120)};
    std::uint32_t max_retries = 3;
    /// Assistant replies for the mock provider; each run replays from the start.
    std::vector<std::string> mock_script;

    void validate() const;
    /// Config fields that are safe to persist (no secrets).
    nlohmann::json snapshot() const;
};

struct Completion {
    std::string text;
    Usage usage;
};

class GatewayError : public std::runtime_error {
public:
    enum class Kind {
        network,
        timeout,
        server,  // 429 / 5xx: transient, retried
        authentication,
        provider,  // error payload or malformed response
        script_exhausted,
        configuration
    };

    GatewayError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }
    bool retryable() const noexcept;

private:
    Kind kind_;
};

/// Chat-completion backend. Implementations never modify the conversation.
class Provider {
public:
    virtual ~Provider() = default;
    virtual Completion complete(const ModelConfig& config, const Conversation& conv) = 0;
};

/// Whitespace-delimited token count used for deterministic mock accounting.
std::uint64_t whitespace_token_count(std::string_view text);

class MockProvider final : public Provider {
public:
    explicit MockProvider(std::vector<std::string> script);

    Completion complete(const ModelConfig& config, const Conversation& conv) override;

    std::size_t remaining() const;

private:
    mutable std::mutex mutex_;
    std::vector<std::string> script_;
    std::size_t cursor_ = 0;
};

using LogSink = std::function<void(std::string_view)>;

/// Provider speaking one of the supported HTTP wire dialects.
class HttpProvider final : public Provider {
public:
    explicit HttpProvider(std::shared_ptr<HttpTransport> transport, LogSink log = {});

    Completion complete(const ModelConfig& config, const Conversation& conv) override;

private:
    std::shared_ptr<HttpTransport> transport_;
    LogSink log_;
};

namespace wire {

/// Request body for OpenAI-style `/chat/completions` endpoints.
nlohmann::json openai_request(const ModelConfig& config, const Conversation& conv);
Completion parse_openai_response(const nlohmann::json& body);

/// Request body for Anthropic-style `/v1/messages` endpoints.
nlohmann::json anthropic_request(const ModelConfig& config, const Conversation& conv);
Completion parse_anthropic_response(const nlohmann::json& body);

std::string default_endpoint(ProviderKind kind);

}  // namespace wire

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct RetryPolicy {
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{std::chrono::seconds(30)};
    Sleeper sleep;  // defaults to std::this_thread::sleep_for
};

/// Calls `provider` with up to `config.max_retries` retries on transient
/// failures, backing off exponentially. Non-retryable errors propagate at once.
Completion complete(Provider& provider, const ModelConfig& config, const Conversation& conv,
                    const RetryPolicy& policy = {});

/// Builds the provider for `config`: a fresh MockProvider over the configured
/// script, or an HttpProvider over `transport`.
std::unique_ptr<Provider> make_provider(const ModelConfig& config,
                                        std::shared_ptr<HttpTransport> transport,
                                        LogSink log = {});

}  // namespace tfheval
