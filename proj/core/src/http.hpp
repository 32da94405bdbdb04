#pragma once

// Internal: thin JSON-over-HTTP POST used by the chat and embedding adapters.

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace enrichbench::detail {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // starts with '/'
};

// Throws ConfigError for anything that is not an http(s) URL.
Endpoint parse_endpoint(const std::string& url);

struct HttpResponse {
    int status = 0;
    std::string body;
};

// Throws ProviderError(0, ...) on transport failure. Non-2xx responses are
// returned, not thrown; callers classify them.
HttpResponse post_json(const Endpoint& endpoint, const std::string& bearer_token,
                       const std::string& body, std::chrono::milliseconds timeout);

// Resolves a credential from the environment variable named by auth_ref.
// Throws ConfigError if the variable is unset or empty.
std::string credential_from_env(const std::string& auth_ref);

// Raises the ProviderError matching a non-2xx response.
[[noreturn]] void throw_http_error(const HttpResponse& response);

}  // namespace enrichbench::detail
