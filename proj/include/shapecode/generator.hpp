#pragma once

// Seeded scene generation by rejection sampling, and dataset materialization
// (target PNGs, per-sample metadata, split manifest).

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapecode/dsl.hpp"
#include "shapecode/image_io.hpp"
#include "shapecode/parallel.hpp"
#include "shapecode/prng.hpp"
#include "shapecode/raster.hpp"

namespace shapecode {

struct IntRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    [[nodiscard]] bool contains(std::int64_t v) const noexcept { return v >= lo && v <= hi; }
    friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct TierConfig {
    std::string name;
    IntRange shape_count;
    IntRange extent;
    IntRange stroke;
    double clip_prob = 0.0;
    std::optional<Ratio> max_bbox_iou;  // nullopt: unconstrained
    bool require_overlap = false;
};

inline TierConfig tier_easy() { return {"easy", {1, 3}, {64, 160}, {2, 6}, 0.00, Ratio{2, 100}, false}; }
inline TierConfig tier_medium() { return {"medium", {3, 6}, {32, 128}, {2, 8}, 0.25, Ratio{35, 100}, false}; }
inline TierConfig tier_hard() { return {"hard", {6, 10}, {16, 128}, {1, 10}, 1.00, std::nullopt, true}; }

inline std::vector<TierConfig> builtin_tiers() { return {tier_easy(), tier_medium(), tier_hard()}; }

inline std::optional<TierConfig> tier_by_name(std::string_view name) {
    for (TierConfig t : builtin_tiers())
        if (t.name == name) return t;
    return std::nullopt;
}

class GenerationExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kMaxShapeAttempts = 1000;
inline constexpr int kMaxSceneRestarts = 100;

namespace detail {

// One candidate; draw order is fixed: kind, extent, stroke (hollow only),
// clip flag, cx, cy.
inline std::pair<Shape, bool> draw_candidate(Prng& rng, const TierConfig& tier) {
    Shape s;
    s.kind = kAllKinds[rng.uniform_int(0, 3)];
    s.extent = static_cast<int>(rng.uniform_int(tier.extent.lo, tier.extent.hi));
    if (is_hollow(s.kind)) {
        const auto t = rng.uniform_int(tier.stroke.lo, tier.stroke.hi);
        s.stroke = static_cast<int>(std::clamp<std::int64_t>(t, 1, max_stroke(s.kind, s.extent)));
    }
    const bool clip = rng.bernoulli(tier.clip_prob);
    s.cx = static_cast<int>(rng.uniform_int(0, kMaxCoord));
    s.cy = static_cast<int>(rng.uniform_int(0, kMaxCoord));
    return {s, clip};
}

inline bool acceptable(const Shape& s, bool clip, const TierConfig& tier, std::span<const Shape> accepted) {
    const BBox box = shape_bbox(s);
    if (box.inside_canvas() == clip) return false;
    if (tier.max_bbox_iou) {
        for (const Shape& other : accepted)
            if (bbox_iou(box, shape_bbox(other)) > *tier.max_bbox_iou) return false;
    }
    return true;
}

inline bool has_overlapping_pair(std::span<const Shape> shapes) {
    for (std::size_t i = 0; i < shapes.size(); ++i)
        for (std::size_t j = i + 1; j < shapes.size(); ++j)
            if (bbox_iou(shape_bbox(shapes[i]), shape_bbox(shapes[j])).num > 0) return true;
    return false;
}

}  // namespace detail

/// Pure function of (tier, seed). Throws GenerationExhausted when the attempt
/// caps are hit.
inline Scene generate_scene(const TierConfig& tier, std::uint64_t seed) {
    Prng rng(seed);
    for (int restart = 0; restart < kMaxSceneRestarts; ++restart) {
        const auto n = rng.uniform_int(tier.shape_count.lo, tier.shape_count.hi);
        Scene scene;
        bool exhausted = false;
        for (std::int64_t i = 0; i < n && !exhausted; ++i) {
            exhausted = true;
            for (int attempt = 0; attempt < kMaxShapeAttempts; ++attempt) {
                const auto [shape, clip] = detail::draw_candidate(rng, tier);
                if (detail::acceptable(shape, clip, tier, scene.shapes)) {
                    scene.shapes.push_back(shape);
                    exhausted = false;
                    break;
                }
            }
        }
        if (exhausted) continue;
        if (tier.require_overlap && !detail::has_overlapping_pair(scene.shapes)) continue;
        return scene;
    }
    throw GenerationExhausted("generation exhausted for tier '" + tier.name + "' seed " + std::to_string(seed));
}

/// Metadata written next to each target image.
struct SampleRecord {
    std::string sample_id;
    std::string split;
    std::string difficulty;
    std::uint64_t seed = 0;
    int canvas_size = kCanvasSize;
    int shape_count = 0;
    std::array<int, 4> shape_inventory{};  // indexed by ShapeKind
    std::string ground_truth_program;
    RenderConfig render_config;
    std::string pixel_hash;
};

inline std::string make_sample_id(std::string_view tier, std::uint64_t seed) {
    std::string digits = std::to_string(seed);
    if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
    return std::string(tier) + "_" + digits;
}

inline nlohmann::ordered_json render_config_json(const RenderConfig& cfg) {
    nlohmann::ordered_json j;
    j["canvas_size"] = cfg.canvas_size;
    j["background"] = cfg.background;
    j["foreground"] = cfg.foreground;
    return j;
}

inline nlohmann::ordered_json to_json(const SampleRecord& r) {
    nlohmann::ordered_json inv;
    for (ShapeKind k : kAllKinds) inv[std::string(kind_name(k))] = r.shape_inventory[static_cast<int>(k)];
    nlohmann::ordered_json j;
    j["sample_id"] = r.sample_id;
    j["split"] = r.split;
    j["difficulty"] = r.difficulty;
    j["seed"] = r.seed;
    j["canvas_size"] = r.canvas_size;
    j["shape_count"] = r.shape_count;
    j["shape_inventory"] = std::move(inv);
    j["ground_truth_program"] = r.ground_truth_program;
    j["render_config"] = render_config_json(r.render_config);
    j["pixel_hash"] = r.pixel_hash;
    return j;
}

inline SampleRecord sample_record_from_json(const nlohmann::json& j) {
    SampleRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.difficulty = j.at("difficulty").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.canvas_size = j.at("canvas_size").get<int>();
    r.shape_count = j.at("shape_count").get<int>();
    for (ShapeKind k : kAllKinds)
        r.shape_inventory[static_cast<int>(k)] = j.at("shape_inventory").at(std::string(kind_name(k))).get<int>();
    r.ground_truth_program = j.at("ground_truth_program").get<std::string>();
    const auto& rc = j.at("render_config");
    r.render_config = {rc.at("canvas_size").get<int>(), rc.at("background").get<std::uint8_t>(),
                       rc.at("foreground").get<std::uint8_t>()};
    r.pixel_hash = j.at("pixel_hash").get<std::string>();
    return r;
}

struct GeneratedSample {
    SampleRecord record;
    Scene scene;
    RasterImage image;
};

inline GeneratedSample generate_sample(const TierConfig& tier, std::uint64_t seed, std::string_view split) {
    GeneratedSample g{{}, generate_scene(tier, seed), RasterImage{}};
    g.image = render(g.scene);
    SampleRecord& r = g.record;
    r.sample_id = make_sample_id(tier.name, seed);
    r.split = split;
    r.difficulty = tier.name;
    r.seed = seed;
    r.shape_count = static_cast<int>(g.scene.size());
    for (const Shape& s : g.scene.shapes) ++r.shape_inventory[static_cast<int>(s.kind)];
    r.ground_truth_program = serialize(g.scene);
    r.pixel_hash = pixel_hash(g.image);
    return g;
}

struct ManifestEntry {
    std::uint64_t seed = 0;
    std::string difficulty;
    std::string pixel_hash;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Split index; entries are keyed (and therefore ordered) by sample_id.
struct Manifest {
    std::string split;
    std::map<std::string, ManifestEntry> samples;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

inline constexpr std::string_view kManifestFile = "manifest.json";

inline nlohmann::ordered_json to_json(const Manifest& m) {
    nlohmann::ordered_json samples = nlohmann::ordered_json::object();
    for (const auto& [id, e] : m.samples) {
        nlohmann::ordered_json entry;
        entry["seed"] = e.seed;
        entry["difficulty"] = e.difficulty;
        entry["pixel_hash"] = e.pixel_hash;
        samples[id] = std::move(entry);
    }
    nlohmann::ordered_json j;
    j["split"] = m.split;
    j["hash_algorithm"] = "sha256";
    j["hash_input"] = "raw 512x512 8-bit grayscale pixels, row-major";
    j["samples"] = std::move(samples);
    return j;
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
    Manifest m;
    m.split = j.at("split").get<std::string>();
    for (const auto& [id, e] : j.at("samples").items())
        m.samples[id] = {e.at("seed").get<std::uint64_t>(), e.at("difficulty").get<std::string>(),
                         e.at("pixel_hash").get<std::string>()};
    return m;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Manifest load_manifest(const std::filesystem::path& dataset_dir) {
    const auto path = dataset_dir / kManifestFile;
    if (!std::filesystem::exists(path)) throw std::runtime_error("manifest not found: " + path.string());
    return manifest_from_json(nlohmann::json::parse(read_text_file(path)));
}

inline SampleRecord load_sample_record(const std::filesystem::path& dataset_dir, std::string_view sample_id) {
    return sample_record_from_json(nlohmann::json::parse(read_text_file(dataset_dir / (std::string(sample_id) + ".json"))));
}

struct SplitRequest {
    std::string split_name;
    std::vector<TierConfig> tiers;
    IntRange seeds;
    std::size_t workers = 1;
};

/// The frozen evaluation preset: all three built-in tiers, seeds 0-49.
inline SplitRequest eval_v1_request() { return {"eval_v1", builtin_tiers(), {0, 49}, 1}; }

/// Generates every tier x seed sample into `out_dir` and writes the manifest.
inline Manifest generate_split(const SplitRequest& req, const std::filesystem::path& out_dir) {
    if (req.seeds.lo < 0 || req.seeds.lo > req.seeds.hi) throw std::invalid_argument("invalid seed range");
    std::filesystem::create_directories(out_dir);

    struct Job { const TierConfig* tier; std::uint64_t seed; };
    std::vector<Job> jobs;
    for (const TierConfig& tier : req.tiers)
        for (auto seed = req.seeds.lo; seed <= req.seeds.hi; ++seed) jobs.push_back({&tier, static_cast<std::uint64_t>(seed)});

    std::vector<SampleRecord> records(jobs.size());
    parallel_for(jobs.size(), req.workers, [&](std::size_t i) {
        GeneratedSample g = generate_sample(*jobs[i].tier, jobs[i].seed, req.split_name);
        write_png(g.image, out_dir / (g.record.sample_id + ".png"));
        write_text_file(out_dir / (g.record.sample_id + ".json"), to_json(g.record).dump(2) + "\n");
        records[i] = std::move(g.record);
    });

    Manifest m{req.split_name, {}};
    for (const SampleRecord& r : records) m.samples[r.sample_id] = {r.seed, r.difficulty, r.pixel_hash};
    write_text_file(out_dir / kManifestFile, to_json(m).dump(2) + "\n");
    return m;
}

struct HashMismatch {
    std::string sample_id;
    std::string expected;
    std::string actual;  // empty when the image could not be read
    std::string error;
};

struct VerifyReport {
    std::size_t checked = 0;
    std::vector<HashMismatch> mismatches;

    [[nodiscard]] bool ok() const noexcept { return mismatches.empty(); }
};

/// Recomputes every target's raw-pixel hash and compares with the manifest.
inline VerifyReport verify_dataset(const std::filesystem::path& dataset_dir) {
    const Manifest m = load_manifest(dataset_dir);
    VerifyReport report;
    for (const auto& [id, entry] : m.samples) {
        ++report.checked;
        try {
            const std::string actual = pixel_hash(read_png(dataset_dir / (id + ".png")));
            if (actual != entry.pixel_hash) report.mismatches.push_back({id, entry.pixel_hash, actual, ""});
        } catch (const std::exception& e) {
            report.mismatches.push_back({id, entry.pixel_hash, "", e.what()});
        }
    }
    return report;
}

}  // namespace shapecode
