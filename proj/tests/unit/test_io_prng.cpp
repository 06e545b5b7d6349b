#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "shapecode/image_io.hpp"
#include "shapecode/prng.hpp"
#include "test_support.hpp"

using namespace shapecode;

// Frozen from tests/oracles/reference_values.py.
TEST(Prng, FirstOutputsMatchReference) {
    struct Row {
        std::uint64_t seed;
        std::uint64_t out[3];
    };
    const Row rows[] = {
        {0, {0x99ec5f36cb75f2b4ULL, 0xbf6e1f784956452aULL, 0x1a5f849d4933e6e0ULL}},
        {1, {0xb3f2af6d0fc710c5ULL, 0x853b559647364ceaULL, 0x92f89756082a4514ULL}},
        {42, {0x15780b2e0c2ec716ULL, 0x6104d9866d113a7eULL, 0xae17533239e499a1ULL}},
    };
    for (const Row& r : rows) {
        Prng p(r.seed);
        for (std::uint64_t expected : r.out) EXPECT_EQ(p.next_u64(), expected) << "seed " << r.seed;
    }
}

TEST(Prng, UniformIntMatchesReference) {
    Prng p(7);
    const std::int64_t expected[] = {90, 210, 406, 64, 280};
    for (std::int64_t e : expected) EXPECT_EQ(p.uniform_int(0, 511), e);
}

TEST(Prng, UniformIntBoundsAndErrors) {
    Prng p(1);
    EXPECT_EQ(p.uniform_int(5, 5), 5);
    EXPECT_THROW(p.uniform_int(6, 5), std::invalid_argument);
    for (int i = 0; i < 10000; ++i) {
        const auto v = p.uniform_int(-3, 3);
        EXPECT_GE(v, -3);
        EXPECT_LE(v, 3);
    }
}

TEST(Prng, UniformIntChiSquare) {
    Prng p(2024);
    constexpr int kBins = 10, kDraws = 100000;
    int counts[kBins] = {};
    for (int i = 0; i < kDraws; ++i) ++counts[p.uniform_int(0, kBins - 1)];
    double chi2 = 0;
    const double e = static_cast<double>(kDraws) / kBins;
    for (int c : counts) chi2 += (c - e) * (c - e) / e;
    EXPECT_LT(chi2, 27.88);  // 9 dof, p = 0.001
}

TEST(Prng, BernoulliRate) {
    Prng p(77);
    int hits = 0;
    for (int i = 0; i < 100000; ++i) hits += p.bernoulli(0.25);
    EXPECT_NEAR(hits / 100000.0, 0.25, 0.01);
    Prng q(1);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_FALSE(q.bernoulli(0.0));
        EXPECT_TRUE(q.bernoulli(1.0));
    }
}

TEST(Prng, SameSeedSameStream) {
    Prng a(123), b(123), c(124);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        differs = differs || x != c.next_u64();
    }
    EXPECT_TRUE(differs);
}

TEST(ImageIo, Sha256Reference) {
    EXPECT_EQ(pixel_hash(RasterImage(kBackground)), "3b874d3ba46c638fc3094f8e92fb744ca974893873f8885f54e23760f9b6311b");
    EXPECT_EQ(pixel_hash(RasterImage(kForeground)), "8a39d2abd3999ab73c34db2476849cddf303ce389b35826850f9a700589b4a90");
    EXPECT_EQ(sha256_hex(std::string_view("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ImageIo, PngRoundTrip) {
    support::TempDir dir;
    std::mt19937_64 rng(8);
    const RasterImage img = render(support::random_scene(rng));
    write_png(img, dir / "a.png");
    EXPECT_EQ(read_png(dir / "a.png"), img);
    write_png(img, dir / "b.png");
    EXPECT_EQ(support::oracle_counts(read_png(dir / "b.png"), img).equal, static_cast<long>(kPixelCount));
}

TEST(ImageIo, ReadErrors) {
    support::TempDir dir;
    EXPECT_THROW(read_png(dir / "missing.png"), ImageIoError);
    write_text_file(dir / "junk.png", "definitely not a png");
    EXPECT_THROW(read_png(dir / "junk.png"), ImageIoError);
}

TEST(ImageIo, WrongDimensions) {
    support::TempDir dir;
    png_image im{};
    im.version = PNG_IMAGE_VERSION;
    im.width = 16;
    im.height = 8;
    im.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(16 * 8, 255);
    const auto path = (dir / "small.png").string();
    ASSERT_TRUE(png_image_write_to_file(&im, path.c_str(), 0, buf.data(), 0, nullptr));
    EXPECT_THROW(read_png(path), DimensionError);
}

TEST(ImageIo, WriteToUnwritableLocation) {
    EXPECT_THROW(write_png(RasterImage(kBackground), "/nonexistent_dir/x/y.png"), ImageIoError);
}
