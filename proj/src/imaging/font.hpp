// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace vqar::font {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kAdvance = kGlyphWidth + 1;

// Seven rows, bit 4 is the leftmost column. Lowercase letters map to
// uppercase; characters without a glyph render as '?'.
const std::array<std::uint8_t, kGlyphHeight>& glyph(char c);

inline bool pixel_on(char c, int col, int row) {
    return (glyph(c)[row] >> (kGlyphWidth - 1 - col)) & 1u;
}

}  // namespace vqar::font
