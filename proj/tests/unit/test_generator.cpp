#include <gtest/gtest.h>

#include <fstream>

#include "shapecode/generator.hpp"
#include "shapecode/parser.hpp"
#include "test_support.hpp"

using namespace shapecode;

TEST(Generator, PureFunctionOfTierAndSeed) {
    for (const TierConfig& t : builtin_tiers())
        for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(generate_scene(t, seed), generate_scene(t, seed));
    EXPECT_NE(generate_scene(tier_hard(), 0), generate_scene(tier_hard(), 1));
}

TEST(Generator, TierTable) {
    const TierConfig e = tier_easy(), m = tier_medium(), h = tier_hard();
    EXPECT_EQ(e.shape_count, (IntRange{1, 3}));
    EXPECT_EQ(m.extent, (IntRange{32, 128}));
    EXPECT_EQ(h.stroke, (IntRange{1, 10}));
    EXPECT_EQ(m.clip_prob, 0.25);
    EXPECT_EQ(*e.max_bbox_iou, (Ratio{2, 100}));
    EXPECT_FALSE(h.max_bbox_iou.has_value());
    EXPECT_TRUE(h.require_overlap);
    EXPECT_FALSE(tier_by_name("extreme").has_value());
}

TEST(Generator, ScenesSatisfyTierRules) {
    for (const TierConfig& t : builtin_tiers())
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto bad = support::audit_tier(t, generate_scene(t, seed));
            EXPECT_TRUE(bad.empty()) << t.name << " seed " << seed << ": " << bad.front();
        }
}

TEST(Generator, MediumTierMixesClippedAndContained) {
    int clipped = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed)
        for (const Shape& s : generate_scene(tier_medium(), seed).shapes) {
            clipped += !shape_bbox(s).inside_canvas();
            ++total;
        }
    const double rate = static_cast<double>(clipped) / total;
    EXPECT_GT(rate, 0.15);
    EXPECT_LT(rate, 0.35);
}

TEST(Generator, PathologicalTierExhausts) {
    // Two contained 300-pixel shapes can never have zero box overlap.
    const TierConfig t{"pathological", {2, 2}, {300, 300}, {1, 1}, 0.0, Ratio{0, 1}, false};
    EXPECT_THROW(generate_scene(t, 0), GenerationExhausted);
}

TEST(Generator, SampleRecordFields) {
    const GeneratedSample g = generate_sample(tier_medium(), 7, "eval_v1");
    EXPECT_EQ(g.record.sample_id, "medium_0007");
    EXPECT_EQ(g.record.difficulty, "medium");
    EXPECT_EQ(g.record.shape_count, static_cast<int>(g.scene.size()));
    int inv = 0;
    for (int c : g.record.shape_inventory) inv += c;
    EXPECT_EQ(inv, g.record.shape_count);
    EXPECT_EQ(*parse(g.record.ground_truth_program), g.scene);
    EXPECT_EQ(g.record.pixel_hash, pixel_hash(render(g.scene)));

    const auto j = to_json(g.record);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    const std::vector<std::string> expected = {"sample_id",    "split",           "difficulty",
                                               "seed",         "canvas_size",     "shape_count",
                                               "shape_inventory", "ground_truth_program", "render_config",
                                               "pixel_hash"};
    EXPECT_EQ(keys, expected);
    const SampleRecord back = sample_record_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(to_json(back), j);
}

TEST(Generator, SampleIdPadding) {
    EXPECT_EQ(make_sample_id("easy", 0), "easy_0000");
    EXPECT_EQ(make_sample_id("hard", 49), "hard_0049");
    EXPECT_EQ(make_sample_id("hard", 123456), "hard_123456");
}

TEST(Generator, SplitWriteAndVerify) {
    support::TempDir dir;
    SplitRequest req{"mini", {tier_easy(), tier_hard()}, {3, 6}, 2};
    const Manifest m = generate_split(req, dir.path());
    EXPECT_EQ(m.samples.size(), 8u);
    EXPECT_EQ(load_manifest(dir.path()), m);
    for (const auto& [id, e] : m.samples) {
        EXPECT_TRUE(std::filesystem::exists(dir / (id + ".png")));
        const SampleRecord r = load_sample_record(dir.path(), id);
        EXPECT_EQ(r.pixel_hash, e.pixel_hash);
        EXPECT_EQ(pixel_hash(read_png(dir / (id + ".png"))), e.pixel_hash);
    }
    const VerifyReport ok = verify_dataset(dir.path());
    EXPECT_TRUE(ok.ok());
    EXPECT_EQ(ok.checked, 8u);

    // Tamper with one target.
    RasterImage img = read_png(dir / "easy_0003.png");
    img.at(0, 0) = img.at(0, 0) == kForeground ? kBackground : kForeground;
    write_png(img, dir / "easy_0003.png");
    const VerifyReport bad = verify_dataset(dir.path());
    ASSERT_EQ(bad.mismatches.size(), 1u);
    EXPECT_EQ(bad.mismatches[0].sample_id, "easy_0003");
}

TEST(Generator, WorkerCountDoesNotChangeOutput) {
    support::TempDir a, b;
    SplitRequest req{"w", builtin_tiers(), {0, 9}, 1};
    const Manifest m1 = generate_split(req, a.path());
    req.workers = 4;
    const Manifest m4 = generate_split(req, b.path());
    EXPECT_EQ(m1, m4);
    EXPECT_EQ(read_text_file(a / "manifest.json"), read_text_file(b / "manifest.json"));
}

TEST(Generator, BadSeedRange) {
    support::TempDir dir;
    EXPECT_THROW(generate_split({"x", builtin_tiers(), {5, 4}, 1}, dir.path()), std::invalid_argument);
}

TEST(Generator, MissingManifest) {
    support::TempDir dir;
    EXPECT_THROW(load_manifest(dir.path()), std::runtime_error);
}
