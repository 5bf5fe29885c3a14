// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "gateway/retry.hpp"
#include "gateway/transport.hpp"
#include "gateway/types.hpp"

namespace vqar {

template <class T>
struct CallOutcome {
    std::optional<T> value;
    std::exception_ptr error;
    double latency_ms = 0.0;  // includes failed attempts

    bool ok() const noexcept { return value.has_value(); }
};

/// Raised when logprobs were requested and the backend returned none. The
/// text the backend did return travels with the error so callers can fall
/// back.
class UnsupportedLogprobs : public Error {
public:
    explicit UnsupportedLogprobs(ChatResponse partial)
        : Error(ErrorCode::Unsupported, "backend did not supply logprobs"),
          partial_(std::move(partial)) {}
    const ChatResponse& partial() const noexcept { return partial_; }

private:
    ChatResponse partial_;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;

    virtual ChatResponse chat(const ChatRequest& req) = 0;

    // Results come back in request order. With `parallel` the calls may
    // overlap in time.
    virtual std::vector<CallOutcome<ChatResponse>> chat_many(const std::vector<ChatRequest>& reqs,
                                                             bool parallel);
};

class SegmentationClient {
public:
    virtual ~SegmentationClient() = default;

    // Detections with score >= box_threshold, boxes clamped to the image,
    // sorted by descending score.
    virtual SegmentResponse segment(const ImageRef& image, const std::string& text_prompt,
                                    double box_threshold) = 0;

    virtual std::vector<CallOutcome<SegmentResponse>> segment_many(
        const ImageRef& image, const std::vector<std::string>& prompts, double box_threshold,
        bool parallel);
};

// Threshold filter, clamp, drop degenerate boxes, stable sort by score.
std::vector<Detection> finalize_detections(std::vector<Detection> raw, const ImageRef& image,
                                           double box_threshold);

class HttpChatClient final : public ChatClient {
public:
    HttpChatClient(BackendSpec spec, std::shared_ptr<HttpTransport> transport, Sleeper sleep = {});
    ChatResponse chat(const ChatRequest& req) override;

private:
    BackendSpec spec_;
    std::string api_key_;
    std::shared_ptr<HttpTransport> transport_;
    Sleeper sleep_;
};

class HttpSegmentationClient final : public SegmentationClient {
public:
    HttpSegmentationClient(BackendSpec spec, std::shared_ptr<HttpTransport> transport,
                           Sleeper sleep = {});
    SegmentResponse segment(const ImageRef& image, const std::string& text_prompt,
                            double box_threshold) override;

private:
    BackendSpec spec_;
    std::string api_key_;
    std::shared_ptr<HttpTransport> transport_;
    Sleeper sleep_;
};

// Builds a mock when spec.mock_script is set (resolved against base_dir),
// an HTTP client otherwise. Empty endpoints fall back to FOCUS_CHAT_ENDPOINT
// or FOCUS_SEG_ENDPOINT.
std::shared_ptr<ChatClient> make_chat_client(const BackendSpec& spec,
                                             const std::filesystem::path& base_dir = {});
std::shared_ptr<SegmentationClient> make_segmentation_client(
    const BackendSpec& spec, const std::filesystem::path& base_dir = {});

}  // namespace vqar
