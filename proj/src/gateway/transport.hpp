// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

namespace vqar {

struct HttpResult {
    int status = 0;
    std::string body;
};

/// Minimal POST-only HTTP surface the gateway clients need. Connection
/// failures and timeouts throw Error(Transport) marked retryable; any HTTP
/// status is returned to the caller.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResult post_json(const std::string& url, const std::string& body,
                                 const std::string& bearer_token, int timeout_ms) = 0;
};

std::shared_ptr<HttpTransport> make_http_transport();

}  // namespace vqar
