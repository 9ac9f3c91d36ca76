#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace retrofit::detail {

struct HttpReply {
    int status = 0;
    std::string body;
};

struct Endpoint {
    std::string scheme_host_port;
    std::string path;
};

/// Splits "http(s)://host[:port]/path" into the client base and request path.
Endpoint split_url(const std::string &url);

/// POSTs a JSON body. Throws TimeoutError on timeouts and ProviderError on
/// connection failures; HTTP error statuses are returned, not thrown.
HttpReply post_json(const std::string &url, const std::string &body,
                    const std::vector<std::pair<std::string, std::string>> &headers,
                    std::chrono::milliseconds timeout);

}  // namespace retrofit::detail
