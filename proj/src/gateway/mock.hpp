// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

// Scripted, fully deterministic stand-ins for the remote backends.
//
// A script maps a request fingerprint to an ordered list of replies; the
// n-th request carrying that fingerprint gets the n-th reply. Chat
// fingerprints hash the request's text parts plus a temperature bucket
// (0 vs. > 0); image bytes are ignored. Segmentation fingerprints hash the
// text prompt. Latencies are scripted, never measured, so cost ledgers
// built on mocks are exact.
//
// Script file (JSON):
//   {
//     "latency_ms": 0,                      // default for replies without one
//     "chat": [{"text": "..." | ["..."], "hot": false,   // or "fingerprint"
//               "replies": [{"text", "latency_ms", "logprobs", "error"}],
//               "cycle": false}],
//     "segmentation": [{"prompt": "dog",
//               "replies": [{"detections": [...], "latency_ms", "error"}],
//               "cycle": false}],
//     "default_chat": {...}, "default_segmentation": {...}   // optional
//   }
// "error" is one of "transport", "backend" (retryable, like HTTP 500) or
// "malformed" (not retryable).

#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gateway/clients.hpp"

namespace vqar {

struct MockChatReply {
    std::string text;
    std::optional<std::vector<TokenLogprob>> logprobs;
    std::optional<double> latency_ms;
    std::string error;  // empty on success
};

struct MockSegmentationReply {
    std::vector<Detection> detections;
    std::optional<double> latency_ms;
    std::string error;
};

std::string chat_fingerprint(const std::vector<std::string>& text_parts, double temperature);
std::string chat_fingerprint(const ChatRequest& req);
std::string segmentation_fingerprint(const std::string& text_prompt);

class MockScript {
public:
    MockScript& add_chat(const std::string& fingerprint, std::vector<MockChatReply> replies,
                         bool cycle = false);
    MockScript& add_chat_text(const std::vector<std::string>& text_parts, double temperature,
                              std::vector<MockChatReply> replies, bool cycle = false);
    MockScript& add_segmentation(const std::string& text_prompt,
                                 std::vector<MockSegmentationReply> replies, bool cycle = false);
    MockScript& set_default_chat(MockChatReply reply);
    MockScript& set_default_segmentation(MockSegmentationReply reply);
    MockScript& set_default_latency(double ms);

    // Reply for the `index`-th request with this fingerprint; ScriptMiss when
    // the script has none.
    const MockChatReply& chat_reply(const std::string& fingerprint, std::size_t index) const;
    const MockSegmentationReply& segmentation_reply(const std::string& fingerprint,
                                                    std::size_t index) const;
    double default_latency() const noexcept { return default_latency_ms_; }

    nlohmann::json to_json() const;
    static MockScript from_json(const nlohmann::json& j);
    static MockScript load(const std::filesystem::path& path);

private:
    template <class Reply>
    struct Entry {
        std::vector<Reply> replies;
        bool cycle = false;
        std::string source;  // original text, kept for to_json
    };

    std::map<std::string, Entry<MockChatReply>> chat_;
    std::map<std::string, Entry<MockSegmentationReply>> segmentation_;
    std::optional<MockChatReply> default_chat_;
    std::optional<MockSegmentationReply> default_segmentation_;
    double default_latency_ms_ = 0.0;
};

/// Chat backend playing back a script. Honors the same retry bound as the
/// HTTP client (each attempt consumes a reply) but never sleeps. Fan-outs are
/// served in request order so reply assignment never depends on thread timing.
class MockChatClient final : public ChatClient {
public:
    MockChatClient(std::shared_ptr<const MockScript> script, int retries = 0);

    ChatResponse chat(const ChatRequest& req) override;
    std::vector<CallOutcome<ChatResponse>> chat_many(const std::vector<ChatRequest>& reqs,
                                                     bool parallel) override;

    std::size_t calls() const;     // logical chat() invocations
    std::size_t attempts() const;  // including retries

private:
    std::shared_ptr<const MockScript> script_;
    int retries_;
    mutable std::mutex mu_;
    std::map<std::string, std::size_t> next_;
    std::size_t calls_ = 0;
    std::size_t attempts_ = 0;
};

class MockSegmentationClient final : public SegmentationClient {
public:
    MockSegmentationClient(std::shared_ptr<const MockScript> script, int retries = 0);

    SegmentResponse segment(const ImageRef& image, const std::string& text_prompt,
                            double box_threshold) override;
    std::vector<CallOutcome<SegmentResponse>> segment_many(const ImageRef& image,
                                                           const std::vector<std::string>& prompts,
                                                           double box_threshold,
                                                           bool parallel) override;

    std::size_t calls() const;
    std::size_t attempts() const;

private:
    std::shared_ptr<const MockScript> script_;
    int retries_;
    mutable std::mutex mu_;
    std::map<std::string, std::size_t> next_;
    std::size_t calls_ = 0;
    std::size_t attempts_ = 0;
};

// JSON forms of the scripted logprob payloads, shared with trace output.
nlohmann::json token_logprobs_to_json(const std::vector<TokenLogprob>& tokens);
std::vector<TokenLogprob> token_logprobs_from_json(const nlohmann::json& j);

}  // namespace vqar
