#include "proverb/http.hpp"

#include <httplib.h>

namespace proverb::http {

std::string Response::describe() const {
    if (!transport_error.empty()) return transport_error;
    std::string snippet = body.substr(0, 200);
    return "HTTP " + std::to_string(status) + (snippet.empty() ? "" : ": " + snippet);
}

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

namespace {

template <typename Call>
Response perform(const std::string& url, std::chrono::milliseconds timeout, Call&& call) {
    const SplitUrl parts = split_url(url);
    httplib::Client client(parts.origin);
    if (!client.is_valid()) return {0, {}, "invalid endpoint URL: " + url};
    const auto secs = timeout.count() / 1000;
    const auto usecs = (timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Result result = call(client, parts.path);
    if (!result) {
        return {0, {}, "request to " + url + " failed: " + httplib::to_string(result.error())};
    }
    return {result->status, result->body, {}};
}

}  // namespace

Response post_json(const std::string& url, const std::string& body, std::chrono::milliseconds timeout,
                   const Headers& headers) {
    return perform(url, timeout, [&](httplib::Client& client, const std::string& path) {
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        return client.Post(path, h, body, "application/json");
    });
}

Response get(const std::string& url, std::chrono::milliseconds timeout) {
    return perform(url, timeout, [&](httplib::Client& client, const std::string& path) { return client.Get(path); });
}

}  // namespace proverb::http
