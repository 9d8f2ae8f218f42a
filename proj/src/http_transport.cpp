#include "tfheval/http_transport.hpp"

#include <stdexcept>

#include <httplib.h>

#include "tfheval/llm_gateway.hpp"

namespace tfheval {

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw GatewayError(GatewayError::Kind::configuration, "endpoint has no scheme: " + url);
    }
    const auto path_begin = url.find('/', scheme_end + 3);
    if (path_begin == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_begin), url.substr(path_begin)};
}

std::string redact(std::string text, const std::string& secret) {
    if (secret.empty()) {
        return text;
    }
    for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos + 3)) {
        text.replace(pos, secret.size(), "***");
    }
    return text;
}

HttpResponse HttplibTransport::post(const std::string& url, const HeaderList& headers,
                                    const std::string& body, std::chrono::milliseconds timeout) {
    const auto parsed = split_url(url);
    httplib::Client client(parsed.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers hdrs;
    for (const auto& [name, value] : headers) {
        hdrs.emplace(name, value);
    }
    auto result = client.Post(parsed.path, hdrs, body, "application/json");
    if (!result) {
        const auto err = result.error();
        const auto kind = (err == httplib::Error::Read || err == httplib::Error::Write ||
                           err == httplib::Error::ConnectionTimeout)
                              ? GatewayError::Kind::timeout
                              : GatewayError::Kind::network;
        throw GatewayError(kind, "POST " + url + " failed: " + httplib::to_string(err));
    }
    return {result->status, result->body};
}

}  // namespace tfheval
