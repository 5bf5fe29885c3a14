// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#include "conceptualizer/overlay.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "imaging/font.hpp"

namespace vqar {

void OverlayStyle::validate() const {
    if (stroke_width < 1) fail(ErrorCode::Config, "style.stroke_width must be >= 1");
    if (tag_padding < 0) fail(ErrorCode::Config, "style.tag_padding must be >= 0");
    if (max_label_chars < 1) fail(ErrorCode::Config, "style.max_label_chars must be >= 1");
}

const std::array<Rgb, 8>& overlay_palette() {
    static const std::array<Rgb, 8> kPalette = {{
        {230, 25, 75},    // red
        {60, 180, 75},    // green
        {0, 130, 200},    // blue
        {245, 130, 48},   // orange
        {145, 30, 180},   // purple
        {70, 240, 240},   // cyan
        {240, 50, 230},   // magenta
        {255, 225, 25},   // yellow
    }};
    return kPalette;
}

PixelRect box_pixels(const Box& box, int width, int height) {
    auto cx = [&](double v) { return std::clamp(static_cast<int>(std::floor(v)), 0, width - 1); };
    auto cy = [&](double v) { return std::clamp(static_cast<int>(std::floor(v)), 0, height - 1); };
    PixelRect r{cx(box.x0), cy(box.y0), std::clamp(static_cast<int>(std::ceil(box.x1)) - 1, 0, width - 1),
                std::clamp(static_cast<int>(std::ceil(box.y1)) - 1, 0, height - 1)};
    r.x1 = std::max(r.x1, r.x0);
    r.y1 = std::max(r.y1, r.y0);
    return r;
}

std::string tag_text(std::string_view label, const OverlayStyle& style) {
    return std::string(label.substr(0, static_cast<std::size_t>(style.max_label_chars)));
}

std::optional<PixelRect> tag_rect(const PixelRect& box, std::string_view label,
                                  const OverlayStyle& style, int width, int height) {
    const std::string txt = tag_text(label, style);
    if (!style.draw_tags || txt.empty()) return std::nullopt;
    const int w = 2 * style.tag_padding + static_cast<int>(txt.size()) * font::kAdvance - 1;
    const int h = 2 * style.tag_padding + font::kGlyphHeight;
    PixelRect r;
    r.x0 = box.x0;
    r.y0 = box.y0 - h >= 0 ? box.y0 - h : box.y0;
    r.x1 = std::min(width - 1, r.x0 + w - 1);
    r.y1 = std::min(height - 1, r.y0 + h - 1);
    return r;
}

void draw_detection(Image& image, const Detection& det, Rgb color, const OverlayStyle& style) {
    const PixelRect b = box_pixels(det.box, image.width(), image.height());
    const int sw = style.stroke_width;
    for (int y = b.y0; y <= b.y1; ++y) {
        for (int x = b.x0; x <= b.x1; ++x) {
            if (x - b.x0 < sw || b.x1 - x < sw || y - b.y0 < sw || b.y1 - y < sw) image.set(x, y, color);
        }
    }

    const auto tag = tag_rect(b, det.label, style, image.width(), image.height());
    if (!tag) return;
    for (int y = tag->y0; y <= tag->y1; ++y) {
        for (int x = tag->x0; x <= tag->x1; ++x) image.set(x, y, color);
    }
    const std::string txt = tag_text(det.label, style);
    const int ox = tag->x0 + style.tag_padding;
    const int oy = tag->y0 + style.tag_padding;
    for (std::size_t i = 0; i < txt.size(); ++i) {
        for (int row = 0; row < font::kGlyphHeight; ++row) {
            for (int col = 0; col < font::kGlyphWidth; ++col) {
                if (!font::pixel_on(txt[i], col, row)) continue;
                const int x = ox + static_cast<int>(i) * font::kAdvance + col;
                const int y = oy + row;
                if (tag->contains(x, y)) image.set(x, y, {0, 0, 0});
            }
        }
    }
}

}  // namespace vqar
