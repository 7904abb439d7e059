#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace proverb::http {

struct Response {
    int status = 0;
    std::string body;
    // Non-empty when no HTTP response was received at all.
    std::string transport_error;

    bool ok() const noexcept { return transport_error.empty() && status == 200; }
    std::string describe() const;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

// url is "http[s]://host[:port][/path]".
Response post_json(const std::string& url, const std::string& body, std::chrono::milliseconds timeout,
                   const Headers& headers = {});
Response get(const std::string& url, std::chrono::milliseconds timeout);

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // always starts with '/'
};
SplitUrl split_url(const std::string& url);

}  // namespace proverb::http
