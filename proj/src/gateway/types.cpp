// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "gateway/types.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace vqar {

void ChatRequest::validate() const {
    if (!std::isfinite(temperature) || temperature < 0.0) {
        fail(ErrorCode::InvalidArgument, "chat temperature must be finite and >= 0");
    }
    if (max_tokens <= 0) fail(ErrorCode::InvalidArgument, "max_tokens must be positive");
    bool has_user = false;
    for (const auto& m : messages) {
        if (m.role == Role::User) has_user = true;
        for (const auto& p : m.parts) {
            if (p.kind == ContentPart::Kind::Image && (!p.image.bytes || p.image.media_type.empty())) {
                fail(ErrorCode::InvalidArgument, "image part needs encoded bytes and a media type");
            }
        }
    }
    if (!has_user) fail(ErrorCode::InvalidArgument, "chat request needs at least one user message");
}

std::vector<std::string> ChatRequest::text_parts() const {
    std::vector<std::string> out;
    for (const auto& m : messages) {
        for (const auto& p : m.parts) {
            if (p.kind == ContentPart::Kind::Text) out.push_back(p.text);
        }
    }
    return out;
}

void BackendSpec::validate() const {
    if (timeout_ms <= 0) fail(ErrorCode::Config, "backend timeout_ms must be positive");
    if (retries < 0 || retries > kMaxRetries) {
        fail(ErrorCode::Config, "backend retries must be within [0, 5]");
    }
    if (backoff_ms < 0) fail(ErrorCode::Config, "backend backoff_ms must be >= 0");
}

std::string to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::MultimodalChat: return "multimodal_chat";
        case BackendKind::TextChat: return "text_chat";
        case BackendKind::Segmentation: return "segmentation";
    }
    return "unknown";
}

BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "multimodal_chat") return BackendKind::MultimodalChat;
    if (s == "text_chat") return BackendKind::TextChat;
    if (s == "segmentation") return BackendKind::Segmentation;
    fail(ErrorCode::Config, "unknown backend kind: " + s);
}

std::optional<Box> clamp_box(const Box& box, int width, int height) {
    Box b{std::clamp(box.x0, 0.0, static_cast<double>(width)),
          std::clamp(box.y0, 0.0, static_cast<double>(height)),
          std::clamp(box.x1, 0.0, static_cast<double>(width)),
          std::clamp(box.y1, 0.0, static_cast<double>(height))};
    if (!(b.x0 < b.x1) || !(b.y0 < b.y1)) return std::nullopt;
    return b;
}

}  // namespace vqar
