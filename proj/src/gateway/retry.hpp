// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "common/error.hpp"

namespace vqar {

struct RetryPolicy {
    int retries = 0;
    int backoff_ms = 0;  // first delay; doubles per retry
};

using Sleeper = std::function<void(int ms)>;

// Runs `attempt(i)` for i = 0..retries until it succeeds or throws a
// non-retryable Error. At most 1 + retries attempts are made.
template <class F>
auto call_with_retries(const RetryPolicy& policy, F&& attempt, const Sleeper& sleep)
    -> decltype(attempt(0)) {
    int delay = policy.backoff_ms;
    for (int i = 0;; ++i) {
        try {
            return attempt(i);
        } catch (const Error& e) {
            if (!e.retryable() || i >= policy.retries) throw;
        }
        if (sleep && delay > 0) sleep(delay);
        delay *= 2;
    }
}

}  // namespace vqar
