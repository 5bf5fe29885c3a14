// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

// JSON bodies exchanged with remote backends.
//
// Chat uses the OpenAI chat-completions shape: image parts travel as
// base64 data URLs, and token logprobs are read from
// choices[0].logprobs.content[].
//
// Segmentation uses a small contract any grounding model can be wrapped in:
//   POST {"image_b64", "text_prompt", "box_threshold"}
//   ->   {"detections": [{"label", "box": [x0, y0, x1, y1], "score"}]}

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gateway/types.hpp"

namespace vqar::wire {

// Candidates requested per position when logprobs are wanted.
inline constexpr int kTopLogprobs = 5;

nlohmann::json chat_request_body(const std::string& model, const ChatRequest& req);

// Throws Error(Backend) on a malformed payload. latency_ms is left at 0.
ChatResponse parse_chat_response(const std::string& body);

nlohmann::json segmentation_request_body(const ImageRef& image, const std::string& text_prompt,
                                         double box_threshold);

// Throws Error(Backend) on a malformed payload or out-of-range scores.
std::vector<Detection> parse_segmentation_response(const std::string& body);

nlohmann::json detection_to_json(const Detection& d);
Detection detection_from_json(const nlohmann::json& j);

}  // namespace vqar::wire
