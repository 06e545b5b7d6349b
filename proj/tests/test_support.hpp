#pragma once

// Independent oracles and fixtures for the test suites. Nothing here calls
// the code paths it is used to check.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "shapecode/dsl.hpp"
#include "shapecode/generator.hpp"
#include "shapecode/raster.hpp"

namespace shapecode::support {

/// Membership predicate written straight from the footprint rules.
inline bool oracle_member(const Shape& s, long x, long y) {
    const long dx = x - s.cx, dy = y - s.cy;
    const long d2 = dx * dx + dy * dy;
    const long r = s.extent;
    switch (s.kind) {
        case ShapeKind::FilledCircle: return d2 <= r * r;
        case ShapeKind::Circle: {
            const long t = *s.stroke;
            if (t == r) return d2 <= r * r;
            return (r - t) * (r - t) < d2 && d2 <= r * r;
        }
        case ShapeKind::FilledSquare:
        case ShapeKind::Square: {
            const long left = s.cx - s.extent / 2, top = s.cy - s.extent / 2;
            const bool outer = x >= left && x < left + s.extent && y >= top && y < top + s.extent;
            if (!outer || s.kind == ShapeKind::FilledSquare) return outer;
            const long t = *s.stroke;
            const bool inner = x >= left + t && x < left + s.extent - t && y >= top + t && y < top + s.extent - t;
            return !inner;
        }
    }
    return false;
}

/// Per-pixel, per-shape brute force render.
inline RasterImage oracle_render(const Scene& scene) {
    RasterImage img;
    for (int y = 0; y < kCanvasSize; ++y)
        for (int x = 0; x < kCanvasSize; ++x)
            for (const Shape& s : scene.shapes)
                if (oracle_member(s, x, y)) {
                    img.at(x, y) = kForeground;
                    break;
                }
    return img;
}

/// IoU of two inclusive boxes by counting lattice points.
inline double oracle_box_iou(const BBox& a, const BBox& b) {
    long inter = 0, uni = 0;
    const int x0 = std::min(a.x0, b.x0), x1 = std::max(a.x1, b.x1);
    const int y0 = std::min(a.y0, b.y0), y1 = std::max(a.y1, b.y1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const bool ia = x >= a.x0 && x <= a.x1 && y >= a.y0 && y <= a.y1;
            const bool ib = x >= b.x0 && x <= b.x1 && y >= b.y0 && y <= b.y1;
            inter += ia && ib;
            uni += ia || ib;
        }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct CountOracle {
    long equal = 0;
    long inter = 0;
    long uni = 0;
};

/// Naive 2-D double loop over both images.
inline CountOracle oracle_counts(const RasterImage& a, const RasterImage& b) {
    CountOracle c;
    for (int y = 0; y < kCanvasSize; ++y)
        for (int x = 0; x < kCanvasSize; ++x) {
            const int va = a.at(x, y), vb = b.at(x, y);
            if (va == vb) ++c.equal;
            const bool fa = va < 128, fb = vb < 128;
            if (fa && fb) ++c.inter;
            if (fa || fb) ++c.uni;
        }
    return c;
}

/// Random valid shape, sometimes crossing the canvas edge.
inline Shape random_shape(std::mt19937_64& rng, int max_extent = 160) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Shape s;
    s.kind = kAllKinds[pick(0, 3)];
    s.cx = pick(0, kMaxCoord);
    s.cy = pick(0, kMaxCoord);
    s.extent = pick(1, max_extent);
    if (is_hollow(s.kind)) s.stroke = pick(1, max_stroke(s.kind, s.extent));
    return s;
}

inline Scene random_scene(std::mt19937_64& rng, int max_shapes = 6, int max_extent = 160) {
    Scene sc;
    const int n = std::uniform_int_distribution<int>(1, max_shapes)(rng);
    for (int i = 0; i < n; ++i) sc.shapes.push_back(random_shape(rng, max_extent));
    return sc;
}

inline RasterImage random_binary_image(std::mt19937_64& rng, double density) {
    RasterImage img;
    std::bernoulli_distribution fg(density);
    for (auto& p : img.pixels()) p = fg(rng) ? kForeground : kBackground;
    return img;
}

/// Lists every violated tier rule for a generated scene; empty means valid.
inline std::vector<std::string> audit_tier(const TierConfig& tier, const Scene& scene) {
    std::vector<std::string> bad;
    const auto n = static_cast<std::int64_t>(scene.size());
    if (n < tier.shape_count.lo || n > tier.shape_count.hi) bad.push_back("shape count " + std::to_string(n));
    std::vector<BBox> boxes;
    for (const Shape& s : scene.shapes) {
        if (validate_shape(s)) bad.push_back("invalid shape " + serialize_shape(s));
        if (s.extent < tier.extent.lo || s.extent > tier.extent.hi) bad.push_back("extent " + serialize_shape(s));
        if (s.stroke) {
            // Sampled from the tier range, then clamped to the primitive bound.
            const long cap = max_stroke(s.kind, s.extent);
            const long expected_hi = std::min<long>(tier.stroke.hi, cap);
            const long expected_lo = std::min<long>(tier.stroke.lo, cap);
            if (*s.stroke < expected_lo || *s.stroke > expected_hi) bad.push_back("stroke " + serialize_shape(s));
        }
        BBox b;
        if (is_circular(s.kind)) b = {s.cx - s.extent, s.cy - s.extent, s.cx + s.extent, s.cy + s.extent};
        else b = {s.cx - s.extent / 2, s.cy - s.extent / 2, s.cx - s.extent / 2 + s.extent - 1, s.cy - s.extent / 2 + s.extent - 1};
        const bool inside = b.x0 >= 0 && b.y0 >= 0 && b.x1 <= 511 && b.y1 <= 511;
        if (tier.clip_prob == 0.0 && !inside) bad.push_back("clipped in no-clip tier " + serialize_shape(s));
        if (tier.clip_prob == 1.0 && inside) bad.push_back("unclipped in always-clip tier " + serialize_shape(s));
        boxes.push_back(b);
    }
    bool overlap = false;
    for (std::size_t i = 0; i < boxes.size(); ++i)
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            const double iou = oracle_box_iou(boxes[i], boxes[j]);
            overlap = overlap || iou > 0;
            if (tier.max_bbox_iou && iou > tier.max_bbox_iou->value() + 1e-12)
                bad.push_back("bbox iou " + std::to_string(iou));
        }
    if (tier.require_overlap && !overlap) bad.push_back("no overlapping pair");
    return bad;
}

/// Scoped temporary directory.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "shapecode") {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() / (tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

private:
    std::filesystem::path path_;
};

}  // namespace shapecode::support
