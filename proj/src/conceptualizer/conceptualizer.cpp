// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "conceptualizer/conceptualizer.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "common/error.hpp"
#include "common/text.hpp"

namespace vqar {

namespace {

// Longest phrase still treated as a keyword rather than prose.
constexpr int kMaxWordsPerKeyword = 5;

int word_count(std::string_view s) {
    int n = 0;
    bool in_word = false;
    for (unsigned char c : s) {
        const bool space = std::isspace(c) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::string clean_item(std::string_view raw) {
    std::string s = text::trim(raw);
    // Bullets, quotes and trailing periods the model sometimes adds.
    auto strip = [](unsigned char c) { return c == '"' || c == '\'' || c == '.' || c == '-' || c == '*' || c == '`'; };
    std::size_t b = 0, e = s.size();
    while (b < e && strip(s[b])) ++b;
    while (e > b && strip(s[e - 1])) --e;
    return text::to_lower(text::trim(std::string_view(s).substr(b, e - b)));
}

}  // namespace

ImageRef AnnotatedImage::as_image_ref() const {
    if (overlays.empty()) return base;
    ImageRef ref;
    ref.path = base.path;
    ref.bytes = std::make_shared<const std::vector<std::uint8_t>>(rendered);
    ref.media_type = media_type;
    ref.width = base.width;
    ref.height = base.height;
    return ref;
}

void ConceptualizerConfig::validate() const {
    if (k_max < 0) fail(ErrorCode::Config, "conceptualizer.k_max must be >= 0");
    if (!(box_threshold >= 0.0 && box_threshold <= 1.0)) {
        fail(ErrorCode::Config, "conceptualizer.box_threshold must be within [0,1]");
    }
    if (max_tokens < 1) fail(ErrorCode::Config, "conceptualizer.max_tokens must be >= 1");
    style.validate();
}

std::string extraction_prompt(std::string_view question, int k_max) {
    static const std::string kTemplate =
        "Extract the physical objects or visual elements that must be located in an image to answer "
        "this question. Reply with a comma-separated list of at most {k_max} short noun phrases, or "
        "NONE if no object is named. Question: {question}";
    return text::substitute(text::substitute(kTemplate, "k_max", std::to_string(k_max)), "question",
                            question);
}

std::vector<std::string> parse_keywords(std::string_view reply, int k_max) {
    const std::string trimmed = text::trim(reply);
    if (trimmed.empty() || text::to_upper(clean_item(trimmed)) == "NONE") return {};

    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& raw : text::split(trimmed, ',')) {
        const std::string item = clean_item(raw);
        if (item.empty() || item == "none") continue;
        if (word_count(item) > kMaxWordsPerKeyword) return {};
        if (seen.insert(item).second) out.push_back(item);
    }
    if (static_cast<int>(out.size()) > k_max) out.resize(static_cast<std::size_t>(std::max(k_max, 0)));
    return out;
}

KeywordExtraction extract_keywords(std::string_view question, ChatClient& lm, int k_max, int max_tokens) {
    if (text::trim(question).empty()) fail(ErrorCode::InvalidArgument, "question is empty");
    ChatRequest req;
    req.messages.push_back({Role::User, {ContentPart::text_part(extraction_prompt(question, k_max))}});
    req.temperature = 0.0;
    req.max_tokens = max_tokens;
    const ChatResponse resp = lm.chat(req);

    KeywordExtraction out;
    out.keywords.source_question = std::string(question);
    out.keywords.keywords = parse_keywords(resp.text, k_max);
    out.latency_ms = resp.latency_ms;
    return out;
}

Localization locate(const ImageRef& image, const KeywordSet& ks, SegmentationClient& seg,
                    double box_threshold, bool parallel) {
    Localization out;
    if (ks.empty()) return out;
    auto outcomes = seg.segment_many(image, ks.keywords, box_threshold, parallel);
    out.calls = static_cast<int>(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        out.wall_ms = parallel ? std::max(out.wall_ms, o.latency_ms) : out.wall_ms + o.latency_ms;
        if (o.ok()) {
            out.detections.insert(out.detections.end(), o.value->detections.begin(), o.value->detections.end());
            continue;
        }
        try {
            std::rethrow_exception(o.error);
        } catch (const std::exception& e) {
            out.failures.push_back("segmentation failed for '" + ks.keywords[i] + "': " + e.what());
        }
    }
    return out;
}

AnnotatedImage composite(const ImageRef& image, const std::vector<Detection>& detections,
                         const OverlayStyle& style) {
    style.validate();
    AnnotatedImage out;
    out.base = image;
    Image raster = decode_image(image.view());

    for (const auto& d : detections) {
        auto clamped = clamp_box(d.box, raster.width(), raster.height());
        if (!clamped) continue;
        Detection kept = d;
        kept.box = *clamped;
        out.overlays.push_back(std::move(kept));
    }
    if (out.overlays.empty()) {
        out.rendered = *image.bytes;
        out.media_type = image.media_type;
        return out;
    }
    const auto& palette = overlay_palette();
    for (std::size_t i = 0; i < out.overlays.size(); ++i) {
        draw_detection(raster, out.overlays[i], palette[i % palette.size()], style);
    }
    out.rendered = encode_png(raster);
    out.media_type = "image/png";
    return out;
}

Conceptualization conceptualize(const ImageRef& image, std::string_view question, ChatClient& lm,
                                SegmentationClient& seg, const ConceptualizerConfig& cfg) {
    cfg.validate();
    if (!image.bytes) fail(ErrorCode::ImageDecode, "image has no bytes");
    const ImageRef base = image.width > 0 ? image : ImageRef::from_bytes(*image.bytes, image.path);

    Conceptualization out;
    out.keywords.source_question = std::string(question);
    out.lm_calls = 1;
    try {
        auto extracted = extract_keywords(question, lm, cfg.k_max, cfg.max_tokens);
        out.keywords = std::move(extracted.keywords);
        out.keywords_ms = extracted.latency_ms;
    } catch (const Error& e) {
        out.keywords_ms = e.elapsed_ms();
        out.notes.push_back(std::string("keyword extraction failed: ") + e.what());
    }
    if (out.keywords.empty()) out.notes.push_back("no keywords; image left unchanged");

    Localization loc = locate(base, out.keywords, seg, cfg.box_threshold, cfg.parallel_segmentation);
    out.seg_calls = loc.calls;
    out.segmentation_ms = loc.wall_ms;
    out.notes.insert(out.notes.end(), loc.failures.begin(), loc.failures.end());
    if (!out.keywords.empty() && loc.detections.empty()) {
        out.notes.push_back("no detections above threshold; image left unchanged");
    }

    out.image = composite(base, loc.detections, cfg.style);
    out.detections = out.image.overlays;
    return out;
}

}  // namespace vqar
