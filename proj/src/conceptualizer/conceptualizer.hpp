// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

// Deliberate-path front half: pull the key elements out of the question,
// ground each one with the segmentation backend, and draw the surviving
// detections onto the image.
//
// Every degenerate outcome (no keywords, nothing above threshold, failed
// segmentation) leaves the image untouched, byte for byte.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "conceptualizer/overlay.hpp"
#include "gateway/clients.hpp"

namespace vqar {

struct KeywordSet {
    std::vector<std::string> keywords;
    std::string source_question;

    bool empty() const noexcept { return keywords.empty(); }
};

struct AnnotatedImage {
    ImageRef base;
    std::vector<Detection> overlays;
    std::vector<std::uint8_t> rendered;
    std::string media_type;  // of `rendered`

    // Rendered bytes as an ImageRef, ready to send to the model.
    ImageRef as_image_ref() const;
};

struct ConceptualizerConfig {
    int k_max = 5;
    double box_threshold = 0.7;
    bool parallel_segmentation = true;
    int max_tokens = 64;
    OverlayStyle style;

    void validate() const;
};

inline constexpr int kExtractionPromptVersion = 1;
std::string extraction_prompt(std::string_view question, int k_max);

// Comma-separated reply -> trimmed, lowercased, deduplicated keywords, at
// most k_max. "NONE", an empty reply, or a reply that is not a list of short
// phrases yields no keywords.
std::vector<std::string> parse_keywords(std::string_view reply, int k_max);

struct KeywordExtraction {
    KeywordSet keywords;
    double latency_ms = 0.0;
};

// One text-chat call at temperature 0. Gateway errors propagate.
KeywordExtraction extract_keywords(std::string_view question, ChatClient& lm, int k_max,
                                   int max_tokens = 64);

struct Localization {
    std::vector<Detection> detections;  // keyword order, then descending score
    int calls = 0;
    double wall_ms = 0.0;
    std::vector<std::string> failures;  // one message per failed keyword
};

// One segmentation call per keyword. A failing call counts as zero
// detections for that keyword.
Localization locate(const ImageRef& image, const KeywordSet& ks, SegmentationClient& seg,
                    double box_threshold = 0.7, bool parallel = true);

// Zero detections returns the original encoding unchanged; otherwise a PNG.
AnnotatedImage composite(const ImageRef& image, const std::vector<Detection>& detections,
                         const OverlayStyle& style);

struct Conceptualization {
    AnnotatedImage image;
    KeywordSet keywords;
    std::vector<Detection> detections;
    int lm_calls = 0;
    int seg_calls = 0;
    double keywords_ms = 0.0;
    double segmentation_ms = 0.0;
    std::vector<std::string> notes;  // degradations, for the trace
};

// extract_keywords -> locate -> composite. Only image decode errors escape;
// model-side failures degrade to the original image.
Conceptualization conceptualize(const ImageRef& image, std::string_view question, ChatClient& lm,
                                SegmentationClient& seg, const ConceptualizerConfig& cfg);

}  // namespace vqar
