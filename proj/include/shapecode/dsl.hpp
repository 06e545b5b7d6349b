#pragma once

// Shape/scene domain types, validity rules, bounding boxes and the canonical
// program text.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace shapecode {

inline constexpr int kCanvasSize = 512;
inline constexpr int kMaxCoord = kCanvasSize - 1;
inline constexpr int kMaxExtent = 512;

enum class ShapeKind : std::uint8_t { FilledCircle, Circle, FilledSquare, Square };

inline constexpr ShapeKind kAllKinds[] = {ShapeKind::FilledCircle, ShapeKind::Circle,
                                          ShapeKind::FilledSquare, ShapeKind::Square};

constexpr bool is_hollow(ShapeKind k) noexcept {
    return k == ShapeKind::Circle || k == ShapeKind::Square;
}
constexpr bool is_circular(ShapeKind k) noexcept {
    return k == ShapeKind::FilledCircle || k == ShapeKind::Circle;
}

/// DSL function name for a primitive.
constexpr std::string_view kind_name(ShapeKind k) noexcept {
    switch (k) {
        case ShapeKind::FilledCircle: return "filled_circle";
        case ShapeKind::Circle: return "circle";
        case ShapeKind::FilledSquare: return "filled_square";
        case ShapeKind::Square: return "square";
    }
    return "";
}

inline std::optional<ShapeKind> kind_from_name(std::string_view name) noexcept {
    for (ShapeKind k : kAllKinds)
        if (kind_name(k) == name) return k;
    return std::nullopt;
}

/// Name of the extent keyword: `radius` for circles, `size` for squares.
constexpr std::string_view extent_keyword(ShapeKind k) noexcept {
    return is_circular(k) ? "radius" : "size";
}

/// Largest stroke a hollow primitive of the given extent accepts.
constexpr int max_stroke(ShapeKind k, int extent) noexcept {
    return is_circular(k) ? extent : (extent + 1) / 2;
}

struct Shape {
    ShapeKind kind = ShapeKind::FilledCircle;
    int cx = 0;
    int cy = 0;
    int extent = 1;  // radius for circles, size for squares
    std::optional<int> stroke;

    friend bool operator==(const Shape&, const Shape&) = default;

    static Shape filled_circle(int cx, int cy, int radius) {
        return {ShapeKind::FilledCircle, cx, cy, radius, std::nullopt};
    }
    static Shape circle(int cx, int cy, int radius, int stroke) {
        return {ShapeKind::Circle, cx, cy, radius, stroke};
    }
    static Shape filled_square(int cx, int cy, int size) {
        return {ShapeKind::FilledSquare, cx, cy, size, std::nullopt};
    }
    static Shape square(int cx, int cy, int size, int stroke) {
        return {ShapeKind::Square, cx, cy, size, stroke};
    }
};

/// Ordered shape list. Equality is structural and order-sensitive.
struct Scene {
    std::vector<Shape> shapes;

    friend bool operator==(const Scene&, const Scene&) = default;
    [[nodiscard]] bool empty() const noexcept { return shapes.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return shapes.size(); }
};

/// Exact non-negative fraction; compared by cross multiplication.
struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 1;

    [[nodiscard]] double value() const noexcept {
        return static_cast<double>(num) / static_cast<double>(den);
    }
    friend bool operator==(const Ratio& a, const Ratio& b) noexcept {
        return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<(const Ratio& a, const Ratio& b) noexcept {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<=(const Ratio& a, const Ratio& b) noexcept { return !(b < a); }
    friend bool operator>(const Ratio& a, const Ratio& b) noexcept { return b < a; }
};

/// Inclusive pixel bounds. Not clipped to the canvas.
struct BBox {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    friend bool operator==(const BBox&, const BBox&) = default;
    [[nodiscard]] std::int64_t width() const noexcept { return std::int64_t{x1} - x0 + 1; }
    [[nodiscard]] std::int64_t height() const noexcept { return std::int64_t{y1} - y0 + 1; }
    [[nodiscard]] std::int64_t area() const noexcept { return width() * height(); }
    [[nodiscard]] bool inside_canvas() const noexcept {
        return x0 >= 0 && y0 >= 0 && x1 <= kMaxCoord && y1 <= kMaxCoord;
    }
};

enum class ValidationError : std::uint8_t { OutOfRange, InvalidStroke };

constexpr std::string_view validation_tag(ValidationError e) noexcept {
    return e == ValidationError::OutOfRange ? "out_of_range" : "invalid_stroke";
}

/// Range checks for one primitive. Coordinates and extent are checked before
/// stroke, so a shape violating both reports out_of_range.
constexpr std::optional<ValidationError> validate_shape(const Shape& s) noexcept {
    if (s.cx < 0 || s.cx > kMaxCoord || s.cy < 0 || s.cy > kMaxCoord) return ValidationError::OutOfRange;
    if (s.extent < 1 || s.extent > kMaxExtent) return ValidationError::OutOfRange;
    if (is_hollow(s.kind)) {
        if (!s.stroke || *s.stroke < 1 || *s.stroke > max_stroke(s.kind, s.extent))
            return ValidationError::InvalidStroke;
    } else if (s.stroke) {
        return ValidationError::InvalidStroke;
    }
    return std::nullopt;
}

/// Left/top edge of a square footprint: the square covers exactly `size`
/// pixels starting at `center - floor(size / 2)`.
constexpr int square_origin(int center, int size) noexcept { return center - size / 2; }

constexpr BBox shape_bbox(const Shape& s) noexcept {
    if (is_circular(s.kind)) return {s.cx - s.extent, s.cy - s.extent, s.cx + s.extent, s.cy + s.extent};
    const int x0 = square_origin(s.cx, s.extent);
    const int y0 = square_origin(s.cy, s.extent);
    return {x0, y0, x0 + s.extent - 1, y0 + s.extent - 1};
}

inline Ratio bbox_iou(const BBox& a, const BBox& b) noexcept {
    const std::int64_t ix0 = std::max(a.x0, b.x0), iy0 = std::max(a.y0, b.y0);
    const std::int64_t ix1 = std::min(a.x1, b.x1), iy1 = std::min(a.y1, b.y1);
    const std::int64_t inter = (ix1 < ix0 || iy1 < iy0) ? 0 : (ix1 - ix0 + 1) * (iy1 - iy0 + 1);
    const std::int64_t uni = a.area() + b.area() - inter;
    return {inter, uni};
}

inline std::string serialize_shape(const Shape& s) {
    std::string out;
    out.reserve(64);
    out += kind_name(s.kind);
    out += "(cx=" + std::to_string(s.cx) + ", cy=" + std::to_string(s.cy) + ", ";
    out += extent_keyword(s.kind);
    out += "=" + std::to_string(s.extent);
    if (s.stroke) out += ", stroke=" + std::to_string(*s.stroke);
    out += ")";
    return out;
}

/// Canonical program text: one call per line, fixed keyword order, a single
/// space after each comma, LF-terminated. Empty scene gives empty text.
inline std::string serialize(const Scene& scene) {
    std::string out;
    for (const Shape& s : scene.shapes) {
        out += serialize_shape(s);
        out += '\n';
    }
    return out;
}

}  // namespace shapecode
