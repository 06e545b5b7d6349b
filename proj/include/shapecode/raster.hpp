#pragma once

// Deterministic rasterizer. Pixel centers sit at integer coordinates; a pixel
// belongs to a shape when its center satisfies the shape's membership test:
//
//   filled_circle  dx^2 + dy^2 <= r^2
//   circle         (r - t)^2 < dx^2 + dy^2 <= r^2, or the full disc when t == r
//   filled_square  x in [cx - floor(s/2), cx - floor(s/2) + s - 1], same for y
//   square         filled footprint minus the footprint inset by t per side
//
// Members outside [0, 511]^2 are dropped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "shapecode/dsl.hpp"

namespace shapecode {

inline constexpr std::uint8_t kBackground = 255;
inline constexpr std::uint8_t kForeground = 0;
inline constexpr std::size_t kPixelCount = std::size_t{kCanvasSize} * kCanvasSize;

/// 512x512 8-bit grayscale, row-major.
class RasterImage {
public:
    explicit RasterImage(std::uint8_t fill = kBackground) : pixels_(kPixelCount, fill) {}

    /// Adopts a buffer of exactly 512*512 bytes.
    explicit RasterImage(std::vector<std::uint8_t> pixels) : pixels_(std::move(pixels)) {
        if (pixels_.size() != kPixelCount) throw std::invalid_argument("raster buffer must hold 512*512 bytes");
    }

    static constexpr int width() noexcept { return kCanvasSize; }
    static constexpr int height() noexcept { return kCanvasSize; }

    [[nodiscard]] std::uint8_t at(int x, int y) const noexcept {
        return pixels_[static_cast<std::size_t>(y) * kCanvasSize + static_cast<std::size_t>(x)];
    }
    std::uint8_t& at(int x, int y) noexcept {
        return pixels_[static_cast<std::size_t>(y) * kCanvasSize + static_cast<std::size_t>(x)];
    }

    [[nodiscard]] std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    [[nodiscard]] std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::vector<std::uint8_t> pixels_;
};

struct RenderConfig {
    int canvas_size = kCanvasSize;
    std::uint8_t background = kBackground;
    std::uint8_t foreground = kForeground;

    friend bool operator==(const RenderConfig&, const RenderConfig&) = default;
};

namespace detail {

inline void fill_span(RasterImage& img, int y, int x0, int x1, std::uint8_t value) {
    if (y < 0 || y > kMaxCoord) return;
    x0 = std::max(x0, 0);
    x1 = std::min(x1, kMaxCoord);
    for (int x = x0; x <= x1; ++x) img.at(x, y) = value;
}

// Largest dx >= 0 with dx^2 <= bound, or -1 when bound < 0.
inline std::int64_t isqrt_floor(std::int64_t bound) {
    if (bound < 0) return -1;
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(bound)));
    while (r * r > bound) --r;
    while ((r + 1) * (r + 1) <= bound) ++r;
    return r;
}

inline void draw_circle(RasterImage& img, const Shape& s, std::uint8_t fg) {
    const std::int64_t r = s.extent;
    // Annulus keeps inner^2 < d^2. A stroke equal to the radius fills the disc,
    // center included.
    const std::int64_t inner = (s.stroke && *s.stroke < s.extent) ? r - *s.stroke : -1;
    const int y0 = std::max(s.cy - s.extent, 0), y1 = std::min(s.cy + s.extent, kMaxCoord);
    for (int y = y0; y <= y1; ++y) {
        const std::int64_t dy = y - s.cy;
        const std::int64_t outer_dx = isqrt_floor(r * r - dy * dy);
        if (outer_dx < 0) continue;
        if (inner < 0) {
            fill_span(img, y, static_cast<int>(s.cx - outer_dx), static_cast<int>(s.cx + outer_dx), fg);
            continue;
        }
        // Pixels with dx^2 <= inner^2 - dy^2 are excluded.
        const std::int64_t hole_dx = isqrt_floor(inner * inner - dy * dy);
        if (hole_dx < 0) {
            fill_span(img, y, static_cast<int>(s.cx - outer_dx), static_cast<int>(s.cx + outer_dx), fg);
        } else {
            fill_span(img, y, static_cast<int>(s.cx - outer_dx), static_cast<int>(s.cx - hole_dx - 1), fg);
            fill_span(img, y, static_cast<int>(s.cx + hole_dx + 1), static_cast<int>(s.cx + outer_dx), fg);
        }
    }
}

inline void draw_square(RasterImage& img, const Shape& s, std::uint8_t fg) {
    const BBox b = shape_bbox(s);
    const int t = s.stroke.value_or(0);
    // Inner box (excluded): inset by t on all sides; empty when 2t >= size.
    const int ix0 = b.x0 + t, ix1 = b.x1 - t, iy0 = b.y0 + t, iy1 = b.y1 - t;
    const bool has_hole = s.stroke && ix0 <= ix1 && iy0 <= iy1;
    for (int y = std::max(b.y0, 0); y <= std::min(b.y1, kMaxCoord); ++y) {
        if (has_hole && y >= iy0 && y <= iy1) {
            fill_span(img, y, b.x0, ix0 - 1, fg);
            fill_span(img, y, ix1 + 1, b.x1, fg);
        } else {
            fill_span(img, y, b.x0, b.x1, fg);
        }
    }
}

}  // namespace detail

/// Paints one shape's member pixels with the foreground value.
inline void draw_shape(RasterImage& img, const Shape& s, const RenderConfig& cfg = {}) {
    if (is_circular(s.kind)) detail::draw_circle(img, s, cfg.foreground);
    else detail::draw_square(img, s, cfg.foreground);
}

/// Renders a validated scene, shapes painted in program order.
inline RasterImage render(const Scene& scene, const RenderConfig& cfg = {}) {
    RasterImage img(cfg.background);
    for (const Shape& s : scene.shapes) draw_shape(img, s, cfg);
    return img;
}

/// Foreground mask: true where the pixel value is below `threshold`.
inline std::vector<bool> foreground_mask(const RasterImage& img, std::uint8_t threshold = 128) {
    std::vector<bool> mask(kPixelCount);
    const auto px = img.pixels();
    for (std::size_t i = 0; i < kPixelCount; ++i) mask[i] = px[i] < threshold;
    return mask;
}

inline std::size_t foreground_count(const RasterImage& img, std::uint8_t threshold = 128) {
    const auto px = img.pixels();
    return static_cast<std::size_t>(std::count_if(px.begin(), px.end(), [&](std::uint8_t v) { return v < threshold; }));
}

}  // namespace shapecode
