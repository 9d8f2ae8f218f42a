#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace tfheval {

using HeaderList = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Minimal POST transport. Throws GatewayError(network|timeout) when no HTTP
/// response was obtained; HTTP error statuses are returned, not thrown.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& url, const HeaderList& headers,
                              const std::string& body, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport (http:// and https://).
class HttplibTransport final : public HttpTransport {
public:
    HttpResponse post(const std::string& url, const HeaderList& headers, const std::string& body,
                      std::chrono::milliseconds timeout) override;
};

struct ParsedUrl {
    std::string scheme_host_port;  // e.g. "https://api.openai.com:443"
    std::string path;              // always starts with '/'
};

ParsedUrl split_url(const std::string& url);

/// Replaces every occurrence of `secret` in `text` with "***".
std::string redact(std::string text, const std::string& secret);

}  // namespace tfheval
