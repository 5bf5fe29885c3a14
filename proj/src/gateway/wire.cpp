// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "gateway/wire.hpp"

#include "common/codec.hpp"
#include "common/error.hpp"

namespace vqar::wire {

using nlohmann::json;

json chat_request_body(const std::string& model, const ChatRequest& req) {
    json messages = json::array();
    for (const auto& m : req.messages) {
        json content = json::array();
        for (const auto& p : m.parts) {
            if (p.kind == ContentPart::Kind::Text) {
                content.push_back({{"type", "text"}, {"text", p.text}});
            } else {
                const std::string url =
                    "data:" + p.image.media_type + ";base64," + codec::base64_encode(p.image.view());
                content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
            }
        }
        messages.push_back({{"role", m.role == Role::System ? "system" : "user"}, {"content", content}});
    }
    json body = {
        {"model", model},
        {"messages", messages},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens},
        {"logprobs", req.want_logprobs},
    };
    if (req.want_logprobs) body["top_logprobs"] = kTopLogprobs;
    if (req.seed) body["seed"] = *req.seed;
    return body;
}

ChatResponse parse_chat_response(const std::string& body) {
    ChatResponse out;
    try {
        const json j = json::parse(body);
        const json& choice = j.at("choices").at(0);
        const json& content = choice.at("message").at("content");
        out.text = content.is_null() ? std::string() : content.get<std::string>();
        if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
            choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array()) {
            std::vector<TokenLogprob> tokens;
            for (const auto& t : choice["logprobs"]["content"]) {
                TokenLogprob tl;
                tl.token = t.at("token").get<std::string>();
                tl.logprob = t.at("logprob").get<double>();
                if (t.contains("top_logprobs") && t["top_logprobs"].is_array()) {
                    for (const auto& c : t["top_logprobs"]) {
                        tl.top.push_back({c.at("token").get<std::string>(), c.at("logprob").get<double>()});
                    }
                }
                tokens.push_back(std::move(tl));
            }
            out.token_logprobs = std::move(tokens);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Backend, std::string("malformed chat response: ") + e.what());
    }
    if (out.token_logprobs) {
        for (const auto& t : *out.token_logprobs) {
            if (t.logprob > 0.0) fail(ErrorCode::Backend, "chat response carries a positive logprob");
        }
    }
    return out;
}

json segmentation_request_body(const ImageRef& image, const std::string& text_prompt,
                               double box_threshold) {
    return {
        {"image_b64", codec::base64_encode(image.view())},
        {"text_prompt", text_prompt},
        {"box_threshold", box_threshold},
    };
}

json detection_to_json(const Detection& d) {
    return {{"label", d.label}, {"box", {d.box.x0, d.box.y0, d.box.x1, d.box.y1}}, {"score", d.score}};
}

Detection detection_from_json(const json& j) {
    Detection d;
    d.label = j.at("label").get<std::string>();
    const json& box = j.at("box");
    if (!box.is_array() || box.size() != 4) throw json::other_error::create(501, "box must have 4 numbers", &box);
    d.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(), box[3].get<double>()};
    d.score = j.at("score").get<double>();
    return d;
}

std::vector<Detection> parse_segmentation_response(const std::string& body) {
    std::vector<Detection> out;
    try {
        const json j = json::parse(body);
        for (const auto& d : j.at("detections")) out.push_back(detection_from_json(d));
    } catch (const json::exception& e) {
        fail(ErrorCode::Backend, std::string("malformed segmentation response: ") + e.what());
    }
    for (const auto& d : out) {
        if (!(d.score >= 0.0 && d.score <= 1.0)) {
            fail(ErrorCode::Backend, "detection score outside [0,1]");
        }
    }
    return out;
}

}  // namespace vqar::wire
