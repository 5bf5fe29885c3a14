// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imaging/image.hpp"

namespace vqar {

enum class Role { System, User };

struct ContentPart {
    enum class Kind { Text, Image };
    Kind kind = Kind::Text;
    std::string text;
    ImageRef image;  // set when kind == Image

    static ContentPart text_part(std::string t) {
        ContentPart p;
        p.text = std::move(t);
        return p;
    }
    static ContentPart image_part(ImageRef img) {
        ContentPart p;
        p.kind = Kind::Image;
        p.image = std::move(img);
        return p;
    }
};

struct Message {
    Role role = Role::User;
    std::vector<ContentPart> parts;
};

struct ChatRequest {
    std::vector<Message> messages;
    double temperature = 0.0;
    int max_tokens = 256;
    bool want_logprobs = false;
    std::optional<std::int64_t> seed;

    // Throws Error(InvalidArgument) when the request breaks its invariants.
    void validate() const;

    // All text parts in message order; the mock fingerprint hashes these.
    std::vector<std::string> text_parts() const;
};

struct TokenCandidate {
    std::string token;
    double logprob = 0.0;
};

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;
    std::vector<TokenCandidate> top;  // alternatives at this position, may be empty
};

struct ChatResponse {
    std::string text;
    std::optional<std::vector<TokenLogprob>> token_logprobs;
    double latency_ms = 0.0;
};

struct Box {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    friend bool operator==(const Box&, const Box&) = default;
};

struct Detection {
    std::string label;
    Box box;
    double score = 0.0;
    friend bool operator==(const Detection&, const Detection&) = default;
};

struct SegmentResponse {
    std::vector<Detection> detections;
    double latency_ms = 0.0;
};

enum class BackendKind { MultimodalChat, TextChat, Segmentation };

struct BackendSpec {
    BackendKind kind = BackendKind::MultimodalChat;
    std::string endpoint;                      // full URL of the POST target
    std::string auth_env = "FOCUS_API_KEY";    // env var holding the bearer token
    std::optional<std::string> api_key;        // explicit key wins over auth_env
    std::string model_name;
    int timeout_ms = 60000;
    int retries = 2;
    int backoff_ms = 250;
    std::string mock_script;  // path; when set the backend is a scripted mock

    static constexpr int kMaxRetries = 5;
    void validate() const;
    bool is_chat() const noexcept { return kind != BackendKind::Segmentation; }
};

std::string to_string(BackendKind kind);
BackendKind backend_kind_from_string(const std::string& s);

// Clamp to [0,w]x[0,h]; nullopt when the clamped box is degenerate.
std::optional<Box> clamp_box(const Box& box, int width, int height);

}  // namespace vqar
