#include "tfheval/llm_gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "tfheval/http_transport.hpp"

namespace tfheval {

using json = nlohmann::json;

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "?";
}

Role role_from_string(std::string_view name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    throw std::invalid_argument("unknown role: " + std::string(name));
}

std::string_view to_string(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::openai_style: return "openai_style";
        case ProviderKind::anthropic_style: return "anthropic_style";
        case ProviderKind::mock: return "mock";
    }
    return "?";
}

ProviderKind provider_kind_from_string(std::string_view name) {
    if (name == "openai_style") return ProviderKind::openai_style;
    if (name == "anthropic_style") return ProviderKind::anthropic_style;
    if (name == "mock") return ProviderKind::mock;
    throw std::invalid_argument("unknown provider_kind: " + std::string(name));
}

// ---- Conversation ---------------------------------------------------------

void Conversation::push(Role role, std::string text) {
    const Role expected = [&] {
        auto it = std::find_if(messages_.rbegin(), messages_.rend(),
                               [](const Message& m) { return m.role != Role::system; });
        if (it == messages_.rend()) return Role::user;
        return it->role == Role::user ? Role::assistant : Role::user;
    }();
    if (role != expected) {
        throw std::invalid_argument("conversation turn out of order: expected " +
                                    std::string(to_string(expected)) + ", got " +
                                    std::string(to_string(role)));
    }
    messages_.push_back({role, std::move(text)});
}

void Conversation::add_system(std::string text) {
    const bool only_system = std::all_of(messages_.begin(), messages_.end(),
                                         [](const Message& m) { return m.role == Role::system; });
    if (!only_system) {
        throw std::invalid_argument("system messages must precede all turns");
    }
    messages_.push_back({Role::system, std::move(text)});
}

void Conversation::add_user(std::string text) { push(Role::user, std::move(text)); }
void Conversation::add_assistant(std::string text) { push(Role::assistant, std::move(text)); }

std::string Conversation::system_text() const {
    std::string out;
    for (const auto& m : messages_) {
        if (m.role != Role::system) break;
        if (!out.empty()) out += "\n\n";
        out += m.text;
    }
    return out;
}

void Conversation::validate() const {
    if (messages_.empty()) {
        throw std::invalid_argument("conversation is empty");
    }
    std::size_t i = 0;
    while (i < messages_.size() && messages_[i].role == Role::system) ++i;
    Role expected = Role::user;
    for (; i < messages_.size(); ++i) {
        if (messages_[i].role != expected) {
            throw std::invalid_argument("conversation roles do not alternate at message " +
                                        std::to_string(i));
        }
        expected = expected == Role::user ? Role::assistant : Role::user;
    }
}

Conversation Conversation::keep_last_exchanges(std::size_t exchanges) const {
    Conversation out;
    std::size_t i = 0;
    for (; i < messages_.size() && messages_[i].role == Role::system; ++i) {
        out.messages_.push_back(messages_[i]);
    }
    if (i == messages_.size()) return out;
    out.messages_.push_back(messages_[i]);  // first user turn
    const std::size_t rest_begin = i + 1;
    const std::size_t rest = messages_.size() - rest_begin;
    // Turns after the first user message come in (assistant, user) pairs; a
    // trailing unpaired assistant turn counts as a partial exchange.
    const std::size_t keep = std::min(rest, exchanges * 2 + (rest % 2));
    for (std::size_t j = messages_.size() - keep; j < messages_.size(); ++j) {
        out.messages_.push_back(messages_[j]);
    }
    return out;
}

// ---- ModelConfig ----------------------------------------------------------

void ModelConfig::validate() const {
    if (model_id.empty()) {
        throw std::invalid_argument("model_id must not be empty");
    }
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw std::invalid_argument(model_id + ": temperature must be in [0, 2]");
    }
    if (!(top_p > 0.0 && top_p <= 1.0)) {
        throw std::invalid_argument(model_id + ": top_p must be in (0, 1]");
    }
    if (max_output_tokens == 0) {
        throw std::invalid_argument(model_id + ": max_output_tokens must be positive");
    }
    if (request_timeout.count() <= 0) {
        throw std::invalid_argument(model_id + ": request_timeout must be positive");
    }
    // Self-hosted endpoints may run without authentication.
    if (provider_kind != ProviderKind::mock && credential_ref.empty() && endpoint.empty()) {
        throw std::invalid_argument(model_id + ": credential_ref (environment variable name) is required");
    }
    if (provider_kind == ProviderKind::mock && mock_script.empty()) {
        throw std::invalid_argument(model_id + ": mock provider needs a non-empty script");
    }
}

json ModelConfig::snapshot() const {
    return json{{"model_id", model_id},
                {"provider_kind", to_string(provider_kind)},
                {"endpoint", endpoint.empty() ? wire::default_endpoint(provider_kind) : endpoint},
                {"credential_ref", credential_ref},
                {"temperature", temperature},
                {"top_p", top_p},
                {"max_output_tokens", max_output_tokens},
                {"request_timeout_ms", request_timeout.count()},
                {"max_retries", max_retries}};
}

// ---- errors / retry -------------------------------------------------------

bool GatewayError::retryable() const noexcept {
    return kind_ == Kind::network || kind_ == Kind::timeout || kind_ == Kind::server;
}

Completion complete(Provider& provider, const ModelConfig& config, const Conversation& conv,
                    const RetryPolicy& policy) {
    auto backoff = policy.initial_backoff;
    for (std::uint32_t attempt = 0;; ++attempt) {
        try {
            return provider.complete(config, conv);
        } catch (const GatewayError& e) {
            if (!e.retryable() || attempt >= config.max_retries) throw;
        }
        if (policy.sleep) {
            policy.sleep(backoff);
        } else {
            std::this_thread::sleep_for(backoff);
        }
        const auto next = std::chrono::milliseconds(
            static_cast<std::int64_t>(std::llround(static_cast<double>(backoff.count()) * policy.multiplier)));
        backoff = std::min(next, policy.max_backoff);
    }
}

// ---- mock -----------------------------------------------------------------

std::uint64_t whitespace_token_count(std::string_view text) {
    std::uint64_t count = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        const bool space = std::isspace(c) != 0;
        if (!space && !in_token) ++count;
        in_token = !space;
    }
    return count;
}

MockProvider::MockProvider(std::vector<std::string> script) : script_(std::move(script)) {}

Completion MockProvider::complete(const ModelConfig&, const Conversation& conv) {
    std::string reply;
    {
        std::lock_guard lock(mutex_);
        if (cursor_ >= script_.size()) {
            throw GatewayError(GatewayError::Kind::script_exhausted,
                               "mock script exhausted after " + std::to_string(script_.size()) + " replies");
        }
        reply = script_[cursor_++];
    }
    Usage usage;
    for (const auto& m : conv.messages()) {
        usage.input_tokens += whitespace_token_count(m.text);
    }
    usage.output_tokens = whitespace_token_count(reply);
    return {std::move(reply), usage};
}

std::size_t MockProvider::remaining() const {
    std::lock_guard lock(mutex_);
    return script_.size() - cursor_;
}

// ---- wire formats ---------------------------------------------------------

namespace wire {

std::string default_endpoint(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::openai_style: return "https://api.openai.com/v1/chat/completions";
        case ProviderKind::anthropic_style: return "https://api.anthropic.com/v1/messages";
        case ProviderKind::mock: return "mock://";
    }
    return {};
}

json openai_request(const ModelConfig& config, const Conversation& conv) {
    json messages = json::array();
    for (const auto& m : conv.messages()) {
        messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
    }
    return json{{"model", config.model_id},
                {"messages", std::move(messages)},
                {"temperature", config.temperature},
                {"top_p", config.top_p},
                {"max_tokens", config.max_output_tokens}};
}

namespace {

std::uint64_t usage_field(const json& usage, const char* key) {
    if (!usage.contains(key) || !usage[key].is_number_integer()) {
        throw GatewayError(GatewayError::Kind::provider, std::string("response usage lacks ") + key);
    }
    const auto v = usage[key].get<std::int64_t>();
    if (v < 0) {
        throw GatewayError(GatewayError::Kind::provider, std::string("negative usage field ") + key);
    }
    return static_cast<std::uint64_t>(v);
}

void throw_if_error_payload(const json& body) {
    if (body.contains("error") && !body["error"].is_null()) {
        const auto& err = body["error"];
        std::string msg = err.is_object() ? err.value("message", err.dump()) : err.dump();
        throw GatewayError(GatewayError::Kind::provider, "provider error: " + msg);
    }
}

}  // namespace

Completion parse_openai_response(const json& body) {
    throw_if_error_payload(body);
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
        throw GatewayError(GatewayError::Kind::provider, "response has no choices");
    }
    const auto& message = body["choices"][0].value("message", json::object());
    if (!message.contains("content") || !message["content"].is_string()) {
        throw GatewayError(GatewayError::Kind::provider, "response choice has no text content");
    }
    if (!body.contains("usage")) {
        throw GatewayError(GatewayError::Kind::provider, "response has no usage block");
    }
    const auto& usage = body["usage"];
    return {message["content"].get<std::string>(),
            {usage_field(usage, "prompt_tokens"), usage_field(usage, "completion_tokens")}};
}

json anthropic_request(const ModelConfig& config, const Conversation& conv) {
    json messages = json::array();
    for (const auto& m : conv.messages()) {
        if (m.role == Role::system) continue;
        messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
    }
    json body{{"model", config.model_id},
              {"messages", std::move(messages)},
              {"temperature", config.temperature},
              {"top_p", config.top_p},
              {"max_tokens", config.max_output_tokens}};
    if (auto system = conv.system_text(); !system.empty()) {
        body["system"] = std::move(system);
    }
    return body;
}

Completion parse_anthropic_response(const json& body) {
    throw_if_error_payload(body);
    if (!body.contains("content") || !body["content"].is_array()) {
        throw GatewayError(GatewayError::Kind::provider, "response has no content array");
    }
    std::string text;
    bool any_text = false;
    for (const auto& block : body["content"]) {
        if (block.value("type", "") == "text" && block.contains("text")) {
            text += block["text"].get<std::string>();
            any_text = true;
        }
    }
    if (!any_text) {
        throw GatewayError(GatewayError::Kind::provider, "response has no text block");
    }
    if (!body.contains("usage")) {
        throw GatewayError(GatewayError::Kind::provider, "response has no usage block");
    }
    const auto& usage = body["usage"];
    return {std::move(text), {usage_field(usage, "input_tokens"), usage_field(usage, "output_tokens")}};
}

}  // namespace wire

// ---- HTTP -----------------------------------------------------------------

HttpProvider::HttpProvider(std::shared_ptr<HttpTransport> transport, LogSink log)
    : transport_(std::move(transport)), log_(std::move(log)) {}

Completion HttpProvider::complete(const ModelConfig& config, const Conversation& conv) {
    conv.validate();
    std::string secret;
    if (!config.credential_ref.empty()) {
        const char* secret_env = std::getenv(config.credential_ref.c_str());
        if (secret_env == nullptr || *secret_env == '\0') {
            throw GatewayError(GatewayError::Kind::authentication,
                               "environment variable " + config.credential_ref + " is not set");
        }
        secret = secret_env;
    }
    const std::string url =
        config.endpoint.empty() ? wire::default_endpoint(config.provider_kind) : config.endpoint;

    HeaderList headers;
    json request;
    switch (config.provider_kind) {
        case ProviderKind::openai_style:
            request = wire::openai_request(config, conv);
            if (!secret.empty()) headers.emplace_back("Authorization", "Bearer " + secret);
            break;
        case ProviderKind::anthropic_style:
            request = wire::anthropic_request(config, conv);
            if (!secret.empty()) headers.emplace_back("x-api-key", secret);
            headers.emplace_back("anthropic-version", "2023-06-01");
            break;
        case ProviderKind::mock:
            throw GatewayError(GatewayError::Kind::configuration, "HttpProvider cannot serve mock models");
    }

    const std::string payload = request.dump();
    if (log_) {
        log_(redact("POST " + url + " " + payload, secret));
    }
    const auto response = transport_->post(url, headers, payload, config.request_timeout);
    if (log_) {
        log_(redact("HTTP " + std::to_string(response.status) + " " + response.body, secret));
    }

    if (response.status == 401 || response.status == 403) {
        throw GatewayError(GatewayError::Kind::authentication,
                           config.model_id + ": authentication failed (HTTP " +
                               std::to_string(response.status) + ")");
    }
    if (response.status == 429 || response.status >= 500) {
        throw GatewayError(GatewayError::Kind::server,
                           config.model_id + ": transient HTTP " + std::to_string(response.status));
    }

    if (response.status != 200) {
        auto body = json::parse(response.body, nullptr, false);
        const std::string msg =
            body.is_object() && body.contains("error") ? body["error"].dump() : response.body;
        throw GatewayError(GatewayError::Kind::provider,
                           config.model_id + ": HTTP " + std::to_string(response.status) + ": " + redact(msg, secret));
    }
    json body;
    try {
        body = json::parse(response.body);
    } catch (const json::parse_error& e) {
        throw GatewayError(GatewayError::Kind::provider,
                           config.model_id + ": malformed response body: " + e.what());
    }
    return config.provider_kind == ProviderKind::openai_style ? wire::parse_openai_response(body)
                                                              : wire::parse_anthropic_response(body);
}

std::unique_ptr<Provider> make_provider(const ModelConfig& config, std::shared_ptr<HttpTransport> transport,
                                        LogSink log) {
    if (config.provider_kind == ProviderKind::mock) {
        return std::make_unique<MockProvider>(config.mock_script);
    }
    if (!transport) {
        transport = std::make_shared<HttplibTransport>();
    }
    return std::make_unique<HttpProvider>(std::move(transport), std::move(log));
}

}  // namespace tfheval
