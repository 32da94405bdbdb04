#include "http.hpp"

#include <httplib.h>

#include <cstdlib>

#include "enrichbench/errors.hpp"
#include "enrichbench/retry.hpp"

namespace enrichbench::detail {

Endpoint parse_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint is not a URL: " + url);
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError("endpoint scheme must be http or https: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.origin = url.substr(0, path_start);
    ep.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (ep.origin.size() <= scheme_end + 3) throw ConfigError("endpoint has no host: " + url);
    return ep;
}

HttpResponse post_json(const Endpoint& endpoint, const std::string& bearer_token,
                       const std::string& body, std::chrono::milliseconds timeout) {
    httplib::Client client(endpoint.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);

    auto result = client.Post(endpoint.path, headers, body, "application/json");
    if (!result) {
        throw ProviderError(0, httplib::to_string(result.error()), /*retryable=*/true);
    }
    return HttpResponse{result->status, result->body};
}

std::string credential_from_env(const std::string& auth_ref) {
    if (auth_ref.empty()) throw ConfigError("provider config has no auth_ref");
    const char* value = std::getenv(auth_ref.c_str());
    if (value == nullptr || *value == '\0') {
        throw ConfigError("environment variable " + auth_ref + " (auth_ref) is not set");
    }
    return value;
}

void throw_http_error(const HttpResponse& response) {
    std::string excerpt = response.body.substr(0, 300);
    throw ProviderError(response.status, excerpt, is_retryable_status(response.status));
}

}  // namespace enrichbench::detail
