#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "shapecode/raster.hpp"
#include "test_support.hpp"

using namespace shapecode;

namespace {

std::size_t fg(const Scene& s) { return foreground_count(render(s)); }

bool subset(const RasterImage& a, const RasterImage& b) {
    const auto pa = a.pixels(), pb = b.pixels();
    for (std::size_t i = 0; i < kPixelCount; ++i)
        if (pa[i] == kForeground && pb[i] != kForeground) return false;
    return true;
}

}  // namespace

TEST(Raster, BlankCanvas) {
    const RasterImage img = render(Scene{});
    EXPECT_EQ(foreground_count(img), 0u);
    EXPECT_TRUE(std::all_of(img.pixels().begin(), img.pixels().end(), [](auto v) { return v == kBackground; }));
}

TEST(Raster, SmallFootprints) {
    EXPECT_EQ(fg(Scene{{Shape::filled_circle(100, 100, 1)}}), 5u);
    EXPECT_EQ(fg(Scene{{Shape::filled_circle(100, 100, 2)}}), 13u);
    EXPECT_EQ(fg(Scene{{Shape::circle(100, 100, 2, 1)}}), 8u);
    EXPECT_EQ(fg(Scene{{Shape::circle(100, 100, 1, 1)}}), 5u);
    EXPECT_EQ(fg(Scene{{Shape::filled_square(100, 100, 1)}}), 1u);
    EXPECT_EQ(fg(Scene{{Shape::filled_square(100, 100, 4)}}), 16u);
    EXPECT_EQ(fg(Scene{{Shape::square(100, 100, 5, 1)}}), 16u);
    EXPECT_EQ(fg(Scene{{Shape::square(100, 100, 6, 2)}}), 32u);
}

TEST(Raster, EvenSquareOrigin) {
    const RasterImage img = render(Scene{{Shape::filled_square(10, 10, 4)}});
    EXPECT_EQ(img.at(8, 8), kForeground);
    EXPECT_EQ(img.at(11, 11), kForeground);
    EXPECT_EQ(img.at(7, 8), kBackground);
    EXPECT_EQ(img.at(12, 11), kBackground);
}

TEST(Raster, CornerClipping) {
    const RasterImage img = render(Scene{{Shape::filled_circle(0, 0, 10)}});
    std::size_t expected = 0;
    for (int y = 0; y <= 10; ++y)
        for (int x = 0; x <= 10; ++x) expected += x * x + y * y <= 100;
    EXPECT_EQ(foreground_count(img), expected);
    EXPECT_EQ(fg(Scene{{Shape::filled_square(511, 511, 512)}}), 257u * 257u);  // origin 255
    EXPECT_EQ(fg(Scene{{Shape::filled_square(0, 0, 512)}}), 256u * 256u);
}

TEST(Raster, MatchesMembershipOracle) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 40; ++i) {
        const Scene s = support::random_scene(rng, 5, 200);
        ASSERT_EQ(render(s), support::oracle_render(s)) << serialize(s);
    }
}

TEST(Raster, SmallShapesMatchOracleExhaustively) {
    for (int r = 1; r <= 12; ++r)
        for (int t = 1; t <= r; ++t) {
            const Scene s{{Shape::circle(256, 256, r, t)}};
            ASSERT_EQ(render(s), support::oracle_render(s)) << serialize(s);
        }
    for (int sz = 1; sz <= 12; ++sz)
        for (int t = 1; t <= max_stroke(ShapeKind::Square, sz); ++t) {
            const Scene s{{Shape::square(255, 256, sz, t)}};
            ASSERT_EQ(render(s), support::oracle_render(s)) << serialize(s);
        }
}

TEST(Raster, OrderInvariance) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) {
        Scene s = support::random_scene(rng);
        const RasterImage a = render(s);
        std::shuffle(s.shapes.begin(), s.shapes.end(), rng);
        EXPECT_EQ(render(s), a);
    }
}

TEST(Raster, Monotonicity) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        Scene s = support::random_scene(rng);
        const RasterImage before = render(s);
        s.shapes.push_back(support::random_shape(rng));
        EXPECT_TRUE(subset(before, render(s)));
    }
}

TEST(Raster, StrokeDegeneracy) {
    for (int r = 1; r <= 40; ++r)
        EXPECT_EQ(render(Scene{{Shape::circle(200, 200, r, r)}}), render(Scene{{Shape::filled_circle(200, 200, r)}}));
    for (int sz = 1; sz <= 40; ++sz) {
        const int t = max_stroke(ShapeKind::Square, sz);
        EXPECT_EQ(render(Scene{{Shape::square(200, 200, sz, t)}}), render(Scene{{Shape::filled_square(200, 200, sz)}}));
    }
}

TEST(Raster, CustomColors) {
    RenderConfig cfg;
    cfg.background = 200;
    cfg.foreground = 10;
    const RasterImage img = render(Scene{{Shape::filled_square(5, 5, 1)}}, cfg);
    EXPECT_EQ(img.at(5, 5), 10);
    EXPECT_EQ(img.at(6, 5), 200);
}
