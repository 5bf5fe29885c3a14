// Copyright 2026 The vqar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vqar {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster, row-major, no padding.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = {255, 255, 255});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    Rgb at(int x, int y) const;
    void set(int x, int y, Rgb c);

    std::span<const std::uint8_t> data() const noexcept { return pixels_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// "image/png", "image/jpeg", or empty when the signature is unknown.
std::string sniff_media_type(std::span<const std::uint8_t> bytes);

// PNG and JPEG; throws Error(ImageDecode) otherwise.
Image decode_image(std::span<const std::uint8_t> bytes);

// Lossless and deterministic: the same raster always yields the same bytes.
std::vector<std::uint8_t> encode_png(const Image& image);

/// An encoded image as it travels through the pipeline. The bytes are shared,
/// so copying a ref is cheap.
struct ImageRef {
    std::string path;
    std::shared_ptr<const std::vector<std::uint8_t>> bytes;
    std::string media_type;
    int width = 0;
    int height = 0;

    // MissingImage if the file is absent, ImageDecode if it cannot be decoded.
    static ImageRef load(const std::string& path);
    static ImageRef from_bytes(std::vector<std::uint8_t> bytes, std::string path = {});

    std::span<const std::uint8_t> view() const noexcept {
        return bytes ? std::span<const std::uint8_t>(*bytes) : std::span<const std::uint8_t>();
    }
};

}  // namespace vqar
