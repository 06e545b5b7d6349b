#pragma once

// Render-based scoring: parse the prediction, render it, compare rasters.

#include <cstdint>
#include <new>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "shapecode/parser.hpp"
#include "shapecode/raster.hpp"

namespace shapecode {

inline constexpr std::uint8_t kForegroundThreshold = 128;
inline constexpr std::string_view kExecutionErrorTag = "execution_error";

struct EvalResult {
    int exact_match = 0;
    double pixel_accuracy = 0.0;
    double fg_iou = 0.0;
    int parse_success = 0;
    int exec_success = 0;
    std::optional<std::string> error_tag;
    std::optional<std::string> error_message;

    friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

inline int exact_match(const RasterImage& target, const RasterImage& pred) noexcept { return target == pred ? 1 : 0; }

inline std::size_t equal_pixel_count(const RasterImage& target, const RasterImage& pred) noexcept {
    const auto a = target.pixels();
    const auto b = pred.pixels();
    std::size_t equal = 0;
    for (std::size_t i = 0; i < kPixelCount; ++i) equal += a[i] == b[i];
    return equal;
}

inline double pixel_accuracy(const RasterImage& target, const RasterImage& pred) noexcept {
    return static_cast<double>(equal_pixel_count(target, pred)) / static_cast<double>(kPixelCount);
}

struct MaskOverlap {
    std::size_t intersection = 0;
    std::size_t uni = 0;
};

inline MaskOverlap mask_overlap(const RasterImage& target, const RasterImage& pred,
                                std::uint8_t threshold = kForegroundThreshold) noexcept {
    const auto a = target.pixels();
    const auto b = pred.pixels();
    MaskOverlap o;
    for (std::size_t i = 0; i < kPixelCount; ++i) {
        const bool ft = a[i] < threshold, fp = b[i] < threshold;
        o.intersection += ft && fp;
        o.uni += ft || fp;
    }
    return o;
}

/// Foreground IoU; 1 when both foreground sets are empty.
inline double fg_iou(const RasterImage& target, const RasterImage& pred,
                     std::uint8_t threshold = kForegroundThreshold) noexcept {
    const MaskOverlap o = mask_overlap(target, pred, threshold);
    if (o.uni == 0) return 1.0;
    return static_cast<double>(o.intersection) / static_cast<double>(o.uni);
}

/// Foreground where exactly one of the two masks is foreground.
inline RasterImage xor_diff(const RasterImage& target, const RasterImage& pred,
                            std::uint8_t threshold = kForegroundThreshold) {
    RasterImage out(kBackground);
    const auto a = target.pixels();
    const auto b = pred.pixels();
    auto o = out.pixels();
    for (std::size_t i = 0; i < kPixelCount; ++i)
        if ((a[i] < threshold) != (b[i] < threshold)) o[i] = kForeground;
    return out;
}

inline EvalResult score_rasters(const RasterImage& target, const RasterImage& pred) {
    EvalResult r;
    r.parse_success = 1;
    r.exec_success = 1;
    r.exact_match = exact_match(target, pred);
    r.pixel_accuracy = pixel_accuracy(target, pred);
    r.fg_iou = fg_iou(target, pred);
    return r;
}

/// Never throws on bad predictions: every failure is encoded in the result.
inline EvalResult evaluate(std::string_view prediction, const RasterImage& target) {
    const ParseResult parsed = parse(prediction);
    if (!parsed) {
        EvalResult r;
        r.error_tag = std::string(classify_error(parsed.error()));
        r.error_message = parsed.error().message;
        return r;
    }
    try {
        return score_rasters(target, render(*parsed));
    } catch (const std::exception& e) {
        EvalResult r;
        r.parse_success = 1;
        r.error_tag = std::string(kExecutionErrorTag);
        r.error_message = e.what();
        return r;
    }
}

inline nlohmann::ordered_json to_json(const EvalResult& r) {
    nlohmann::ordered_json j;
    j["exact_match"] = r.exact_match;
    j["pixel_accuracy"] = r.pixel_accuracy;
    j["fg_iou"] = r.fg_iou;
    j["parse_success"] = r.parse_success;
    j["exec_success"] = r.exec_success;
    j["error_tag"] = r.error_tag ? nlohmann::ordered_json(*r.error_tag) : nlohmann::ordered_json(nullptr);
    j["error_message"] = r.error_message ? nlohmann::ordered_json(*r.error_message) : nlohmann::ordered_json(nullptr);
    return j;
}

inline EvalResult eval_result_from_json(const nlohmann::json& j) {
    EvalResult r;
    r.exact_match = j.at("exact_match").get<int>();
    r.pixel_accuracy = j.at("pixel_accuracy").get<double>();
    r.fg_iou = j.at("fg_iou").get<double>();
    r.parse_success = j.at("parse_success").get<int>();
    r.exec_success = j.at("exec_success").get<int>();
    if (!j.at("error_tag").is_null()) r.error_tag = j.at("error_tag").get<std::string>();
    if (!j.at("error_message").is_null()) r.error_message = j.at("error_message").get<std::string>();
    return r;
}

}  // namespace shapecode
