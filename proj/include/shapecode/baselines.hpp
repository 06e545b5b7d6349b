#pragma once

// Non-model reference systems: the empty-program floor and a classical
// connected-component heuristic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "shapecode/dsl.hpp"
#include "shapecode/raster.hpp"

namespace shapecode {

/// Always predicts nothing.
inline std::string empty_baseline(const RasterImage& /*target*/) { return {}; }

struct Component {
    std::vector<std::uint32_t> pixels;  // row-major indices, ascending
    BBox bbox;                          // always within the canvas
    std::size_t area = 0;

    [[nodiscard]] double fill_ratio() const noexcept {
        return static_cast<double>(area) / static_cast<double>(bbox.area());
    }
};

/// 8-connected foreground components, ordered by (bbox.y0, bbox.x0).
inline std::vector<Component> connected_components(const RasterImage& img, std::uint8_t threshold = 128) {
    const auto px = img.pixels();
    std::vector<std::int32_t> label(kPixelCount, -1);
    std::vector<Component> out;
    std::vector<std::uint32_t> stack;

    for (std::uint32_t seed = 0; seed < kPixelCount; ++seed) {
        if (px[seed] >= threshold || label[seed] >= 0) continue;
        const auto id = static_cast<std::int32_t>(out.size());
        Component c;
        c.bbox = {kMaxCoord, kMaxCoord, 0, 0};
        label[seed] = id;
        stack.assign(1, seed);
        while (!stack.empty()) {
            const std::uint32_t p = stack.back();
            stack.pop_back();
            c.pixels.push_back(p);
            const int x = static_cast<int>(p % kCanvasSize), y = static_cast<int>(p / kCanvasSize);
            c.bbox.x0 = std::min(c.bbox.x0, x);
            c.bbox.x1 = std::max(c.bbox.x1, x);
            c.bbox.y0 = std::min(c.bbox.y0, y);
            c.bbox.y1 = std::max(c.bbox.y1, y);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx > kMaxCoord || ny > kMaxCoord) continue;
                    const auto q = static_cast<std::uint32_t>(ny * kCanvasSize + nx);
                    if (px[q] < threshold && label[q] < 0) {
                        label[q] = id;
                        stack.push_back(q);
                    }
                }
            }
        }
        std::sort(c.pixels.begin(), c.pixels.end());
        c.area = c.pixels.size();
        out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
        return a.bbox.y0 != b.bbox.y0 ? a.bbox.y0 < b.bbox.y0 : a.bbox.x0 < b.bbox.x0;
    });
    return out;
}

inline constexpr double kSquareFillThreshold = 0.89;
inline constexpr double kErosionSurvivalThreshold = 0.5;

struct ComponentGuess {
    Shape shape;                  // clamped into DSL validity
    bool hollow = false;
    double hull_fill_ratio = 0;   // hole-filled area / bbox area
    double erosion_survival = 0;  // pixels surviving one 3x3 erosion / area
};

namespace detail {

// Component mask over its bbox padded by one pixel on every side.
class LocalMask {
public:
    explicit LocalMask(const Component& c)
        : x0_(c.bbox.x0 - 1), y0_(c.bbox.y0 - 1),
          w_(static_cast<int>(c.bbox.width()) + 2), h_(static_cast<int>(c.bbox.height()) + 2),
          cells_(static_cast<std::size_t>(w_) * h_, 0) {
        for (std::uint32_t p : c.pixels)
            cell(static_cast<int>(p % kCanvasSize) - x0_, static_cast<int>(p / kCanvasSize) - y0_) = 1;
    }

    [[nodiscard]] bool at_canvas(int x, int y) const noexcept {
        const int lx = x - x0_, ly = y - y0_;
        return lx >= 0 && ly >= 0 && lx < w_ && ly < h_ && cells_[static_cast<std::size_t>(ly) * w_ + lx];
    }

    /// Area after filling holes: everything not reachable (4-connected) from
    /// the padding ring.
    [[nodiscard]] std::size_t filled_area() const {
        std::vector<std::uint8_t> outside(cells_.size(), 0);
        std::vector<int> stack{0};
        outside[0] = 1;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int x = p % w_, y = p / w_;
            const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
            for (const auto& n : nbr) {
                if (n[0] < 0 || n[1] < 0 || n[0] >= w_ || n[1] >= h_) continue;
                const int q = n[1] * w_ + n[0];
                if (!outside[q] && !cells_[q]) {
                    outside[q] = 1;
                    stack.push_back(q);
                }
            }
        }
        return cells_.size() - static_cast<std::size_t>(std::count(outside.begin(), outside.end(), 1));
    }

    /// Pixels whose full 3x3 neighbourhood lies in the component.
    [[nodiscard]] std::size_t eroded_area() const {
        std::size_t n = 0;
        for (int y = 1; y + 1 < h_; ++y)
            for (int x = 1; x + 1 < w_; ++x) {
                bool all = true;
                for (int dy = -1; dy <= 1 && all; ++dy)
                    for (int dx = -1; dx <= 1 && all; ++dx) all = cells_[static_cast<std::size_t>(y + dy) * w_ + (x + dx)] != 0;
                n += all;
            }
        return n;
    }

private:
    std::uint8_t& cell(int lx, int ly) { return cells_[static_cast<std::size_t>(ly) * w_ + lx]; }

    int x0_, y0_, w_, h_;
    std::vector<std::uint8_t> cells_;
};

}  // namespace detail

/// Kind and parameters for one component.
///
/// Center is the bbox center rounded half up. Circle radius is
/// round((w + h) / 4) with ties going down, which recovers r exactly for an
/// unclipped rendered circle (bbox side 2r + 1); square size is
/// round((w + h) / 2). The hole-filled footprint decides circle vs square;
/// one 3x3 erosion plus a center probe decides hollow vs filled. Stroke is
/// area over an estimated perimeter (2*pi*r or 4*size).
inline ComponentGuess classify_component(const Component& c) {
    const detail::LocalMask mask(c);
    const auto w = c.bbox.width(), h = c.bbox.height();

    ComponentGuess g;
    g.hull_fill_ratio = static_cast<double>(mask.filled_area()) / static_cast<double>(c.bbox.area());
    g.erosion_survival = static_cast<double>(mask.eroded_area()) / static_cast<double>(c.area);

    const int cx = (c.bbox.x0 + c.bbox.x1 + 1) / 2;
    const int cy = (c.bbox.y0 + c.bbox.y1 + 1) / 2;
    g.hollow = g.erosion_survival < kErosionSurvivalThreshold || !mask.at_canvas(cx, cy);
    const bool square = g.hull_fill_ratio >= kSquareFillThreshold;

    Shape& s = g.shape;
    s.cx = std::clamp(cx, 0, kMaxCoord);
    s.cy = std::clamp(cy, 0, kMaxCoord);
    if (square) {
        s.kind = g.hollow ? ShapeKind::Square : ShapeKind::FilledSquare;
        s.extent = static_cast<int>(std::clamp<std::int64_t>((w + h + 1) / 2, 1, kMaxExtent));
    } else {
        s.kind = g.hollow ? ShapeKind::Circle : ShapeKind::FilledCircle;
        s.extent = static_cast<int>(std::clamp<std::int64_t>((w + h + 1) / 4, 1, kMaxExtent));
    }
    if (g.hollow) {
        const double perimeter = square ? 4.0 * s.extent : 2.0 * std::numbers::pi * s.extent;
        const auto t = std::lround(static_cast<double>(c.area) / perimeter);
        s.stroke = static_cast<int>(std::clamp<long>(t, 1, max_stroke(s.kind, s.extent)));
    }
    return g;
}

/// One predicted primitive per connected component, serialized canonically.
/// A blank target yields empty text.
inline std::string heuristic_baseline(const RasterImage& target) {
    Scene scene;
    for (const Component& c : connected_components(target)) scene.shapes.push_back(classify_component(c).shape);
    return serialize(scene);
}

}  // namespace shapecode
