// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "tablepref/error.hpp"
#include "tablepref/io.hpp"

namespace tablepref {

Image::Image(int width, int height, Rgba fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 4) {
    for (std::size_t i = 0; i < data_.size(); i += 4) {
        std::copy(fill.begin(), fill.end(), data_.begin() + static_cast<std::ptrdiff_t>(i));
    }
}

Rgba Image::at(int x, int y) const noexcept {
    const auto* p = pixel(x, y);
    return {p[0], p[1], p[2], p[3]};
}

void Image::set(int x, int y, Rgba c) noexcept {
    std::copy(c.begin(), c.end(), pixel(x, y));
}

Image read_png(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (m.empty()) {
        throw LoadError("cannot read image " + path);
    }
    if (m.depth() != CV_8U) {
        m.convertTo(m, CV_8U, 1.0 / 257.0);
    }
    cv::Mat rgba;
    switch (m.channels()) {
        case 1: cv::cvtColor(m, rgba, cv::COLOR_GRAY2RGBA); break;
        case 3: cv::cvtColor(m, rgba, cv::COLOR_BGR2RGBA); break;
        case 4: cv::cvtColor(m, rgba, cv::COLOR_BGRA2RGBA); break;
        default: throw LoadError("unsupported channel count in " + path);
    }
    Image img(rgba.cols, rgba.rows);
    for (int y = 0; y < rgba.rows; ++y) {
        std::copy_n(rgba.ptr<std::uint8_t>(y), static_cast<std::size_t>(rgba.cols) * 4, img.pixel(0, y));
    }
    return img;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    cv::Mat rgba(image.height(), image.width(), CV_8UC4, const_cast<std::uint8_t*>(image.data().data()));
    cv::Mat bgra;
    cv::cvtColor(rgba, bgra, cv::COLOR_RGBA2BGRA);
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", bgra, out)) {
        throw RenderError("png encoding failed");
    }
    return out;
}

void write_png(const Image& image, const std::string& path) {
    const auto bytes = encode_png(image);
    write_file_atomic(path, std::span<const std::uint8_t>(bytes));
}

void fill_rect(Image& img, int x0, int y0, int x1, int y1, Rgba c) {
    x0 = std::max(0, x0);
    y0 = std::max(0, y0);
    x1 = std::min(img.width(), x1);
    y1 = std::min(img.height(), y1);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            blend_pixel(img, x, y, c);
        }
    }
}

void fill_ellipse(Image& img, double cx, double cy, double rx, double ry, Rgba c) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - rx)));
    const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(cx + rx)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - ry)));
    const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(cy + ry)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = (x + 0.5 - cx) / rx;
            const double dy = (y + 0.5 - cy) / ry;
            if (dx * dx + dy * dy <= 1.0) {
                blend_pixel(img, x, y, c);
            }
        }
    }
}

std::array<int, 3> text_extent(const std::string& text, double scale, int thickness) {
    int baseline = 0;
    const cv::Size s = cv::getTextSize(text, cv::FONT_HERSHEY_SIMPLEX, scale, thickness, &baseline);
    return {s.width, s.height, baseline};
}

void draw_text(Image& img, const std::string& text, int x, int y, double scale, Rgba c, int thickness) {
    cv::Mat view(img.height(), img.width(), CV_8UC4, img.data().data());
    // LINE_8 keeps strokes free of partial alpha.
    cv::putText(view, text, cv::Point(x, y), cv::FONT_HERSHEY_SIMPLEX, scale,
                cv::Scalar(c[0], c[1], c[2], c[3]), thickness, cv::LINE_8);
}

void blend_pixel(Image& dst, int x, int y, Rgba src) noexcept {
    if (x < 0 || y < 0 || x >= dst.width() || y >= dst.height() || src[3] == 0) {
        return;
    }
    auto* d = dst.pixel(x, y);
    if (src[3] == 255) {
        std::copy(src.begin(), src.end(), d);
        return;
    }
    const int a = src[3];
    const int inv = 255 - a;
    for (int k = 0; k < 3; ++k) {
        d[k] = static_cast<std::uint8_t>((src[static_cast<std::size_t>(k)] * a + d[k] * inv + 127) / 255);
    }
    d[3] = static_cast<std::uint8_t>(a + (d[3] * inv + 127) / 255);
}

}  // namespace tablepref
