// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic box-and-tag overlays. A detection is drawn as a solid
// rectangle outline `stroke_width` pixels thick, inset from the box edge,
// plus a filled tag holding the label in a 5x7 bitmap font. The tag sits
// directly above the box's top-left corner, or just inside it when there is
// no room above. Colors cycle through a fixed 8-entry palette by detection
// index; label glyphs are black.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "gateway/types.hpp"
#include "imaging/image.hpp"

namespace vqar {

struct OverlayStyle {
    int stroke_width = 3;
    int tag_padding = 1;
    int max_label_chars = 24;
    bool draw_tags = true;

    void validate() const;
};

// Inclusive pixel rectangle.
struct PixelRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool contains(int x, int y) const noexcept { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
    friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

const std::array<Rgb, 8>& overlay_palette();

// floor/ceil of the box edges, clipped to the image.
PixelRect box_pixels(const Box& box, int width, int height);

std::string tag_text(std::string_view label, const OverlayStyle& style);

// Tag placement for a box, clipped to the image; nullopt when tags are off or
// the label is empty.
std::optional<PixelRect> tag_rect(const PixelRect& box, std::string_view label,
                                  const OverlayStyle& style, int width, int height);

void draw_detection(Image& image, const Detection& det, Rgb color, const OverlayStyle& style);

}  // namespace vqar
