// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vqar {

enum class ErrorCode {
    InvalidArgument,
    Config,
    Schema,
    MissingImage,
    ImageDecode,
    Transport,
    Backend,
    Unsupported,
    ScriptMiss,
    Domain,
    MissingLogprobs,
    Pairing,
    MismatchedRuns,
    LabelMismatch,
    GateFailure,
    AnswerFailure,
    Io,
    Internal,
};

std::string_view to_string(ErrorCode code);

/// Every failure inside the core surfaces as this exception type; the C API
/// translates the code into a status value.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    // Whether the gateway retry loop may try again.
    bool retryable() const noexcept { return retryable_; }
    Error& set_retryable(bool v) noexcept { retryable_ = v; return *this; }

    // Backend time spent before the failure surfaced.
    double elapsed_ms() const noexcept { return elapsed_ms_; }
    Error& set_elapsed_ms(double v) noexcept { elapsed_ms_ = v; return *this; }

    // 1-based input line for schema errors, 0 when not applicable.
    int line() const noexcept { return line_; }
    Error& set_line(int v) noexcept { line_ = v; return *this; }

private:
    ErrorCode code_;
    bool retryable_ = false;
    double elapsed_ms_ = 0.0;
    int line_ = 0;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace vqar
