// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include "gateway/transport.hpp"

#include "common/error.hpp"

namespace vqar {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) fail(ErrorCode::Config, "endpoint is not a URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
public:
    HttpResult post_json(const std::string& url, const std::string& body,
                         const std::string& bearer_token, int timeout_ms) override {
        const SplitUrl target = split_url(url);
        httplib::Client client(target.origin);
        const auto timeout = std::chrono::milliseconds(timeout_ms);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        httplib::Headers headers;
        if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);

        auto res = client.Post(target.path, headers, body, "application/json");
        if (!res) {
            Error err(ErrorCode::Transport,
                      "POST " + url + " failed: " + httplib::to_string(res.error()));
            err.set_retryable(true);
            throw err;
        }
        return {res->status, res->body};
    }
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() {
    return std::make_shared<HttplibTransport>();
}

}  // namespace vqar
