// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tablepref {

using Rgba = std::array<std::uint8_t, 4>;

/// 8-bit RGBA raster, row-major, top-left origin.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgba fill = {0, 0, 0, 0});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }

    std::uint8_t* pixel(int x, int y) noexcept { return &data_[offset(x, y)]; }
    const std::uint8_t* pixel(int x, int y) const noexcept { return &data_[offset(x, y)]; }
    Rgba at(int x, int y) const noexcept;
    void set(int x, int y, Rgba c) noexcept;

    std::vector<std::uint8_t>& data() noexcept { return data_; }
    const std::vector<std::uint8_t>& data() const noexcept { return data_; }

    bool operator==(const Image&) const = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * 4;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

Image read_png(const std::string& path);
void write_png(const Image& image, const std::string& path);
std::vector<std::uint8_t> encode_png(const Image& image);

// Drawing helpers used by the renderers and the placeholder asset generator.
void fill_rect(Image& img, int x0, int y0, int x1, int y1, Rgba c);
void fill_ellipse(Image& img, double cx, double cy, double rx, double ry, Rgba c);
void draw_text(Image& img, const std::string& text, int x, int y, double scale, Rgba c,
               int thickness = 1);
/// Pixel extent of text drawn with draw_text; y is the baseline.
std::array<int, 3> text_extent(const std::string& text, double scale, int thickness = 1);

/// Source-over alpha composite of `src` onto `dst` at pixel (x, y).
void blend_pixel(Image& dst, int x, int y, Rgba src) noexcept;

}  // namespace tablepref
