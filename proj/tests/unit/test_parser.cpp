#include <gtest/gtest.h>

#include <random>
#include <string>

#include "shapecode/parser.hpp"
#include "test_support.hpp"

using namespace shapecode;

namespace {

std::string tag_of(std::string_view text) {
    const ParseResult r = parse(text);
    return r ? std::string("ok") : std::string(tag_name(r.error().tag));
}

struct TagCase {
    const char* program;
    const char* tag;
};

}  // namespace

TEST(Parser, SignatureExample) {
    const ParseResult r = parse("filled_circle(cx=100, cy=100, radius=50)\n");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->size(), 1u);
    EXPECT_EQ(r->shapes[0], Shape::filled_circle(100, 100, 50));
}

TEST(Parser, OneFixturePerTag) {
    const TagCase cases[] = {
        {"", "empty_program"},
        {"filled_circle(cx=1, cy=2, radius=3", "syntax_error"},
        {"import os", "disallowed_construct"},
        {"triangle(cx=1, cy=2, size=3)", "unknown_function"},
        {"filled_square(256, 256, 100)", "positional_args"},
        {"filled_circle(cx=1.5, cy=2, radius=3)", "non_integer_literal"},
        {"filled_circle(cx=1, cx=2, cy=2, radius=3)", "duplicate_keyword"},
        {"filled_circle(cx=1, cy=2, radius=3, stroke=1)", "unexpected_keyword"},
        {"circle(cx=1, cy=2, radius=3)", "missing_keyword"},
        {"filled_circle(cx=-1, cy=0, radius=5)", "out_of_range"},
        {"circle(cx=10, cy=10, radius=5, stroke=9)", "invalid_stroke"},
    };
    std::set<std::string> covered;
    for (const auto& c : cases) {
        EXPECT_EQ(tag_of(c.program), c.tag) << c.program;
        covered.insert(c.tag);
    }
    EXPECT_EQ(covered.size(), kAllErrorTags.size());
}

TEST(Parser, RejectedSurface) {
    const TagCase cases[] = {
        {"   \n\t\n", "empty_program"},
        {"x = 3", "disallowed_construct"},
        {"for i in range(3):", "disallowed_construct"},
        {"def f():", "disallowed_construct"},
        {"np.circle(cx=1, cy=2, radius=3)", "disallowed_construct"},
        {"filled_circle(*args)", "disallowed_construct"},
        {"filled_circle(**kw)", "disallowed_construct"},
        {"filled_circle(cx=abs(1), cy=2, radius=3)", "disallowed_construct"},
        {"filled_circle(cx=1, cy=2, radius=3).x", "disallowed_construct"},
        {"Here is the program:", "syntax_error"},
        {"filled_circle(cx=1, cy=2, radius=3))", "syntax_error"},
        {"filled_circle(cx=1, cy=2, radius=3,)", "syntax_error"},
        {"filled_circle(cx=1, cy=2, radius=3)  # comment", "syntax_error"},
        {"filled_circle(cx=1, cy=2, radius=3) filled_circle(cx=1, cy=2, radius=3)", "syntax_error"},
        {"filled_circle(cx=\"1\", cy=2, radius=3)", "non_integer_literal"},
        {"filled_circle(cx=1+1, cy=2, radius=3)", "non_integer_literal"},
        {"filled_circle(cx=--1, cy=2, radius=3)", "non_integer_literal"},
        {"filled_circle(cx=width, cy=2, radius=3)", "non_integer_literal"},
        {"filled_circle(cx=1e3, cy=2, radius=3)", "non_integer_literal"},
        {"filled_circle(cx=0x10, cy=2, radius=3)", "non_integer_literal"},
        {"square(cx=1, cy=2, size=3, stroke=1, stroke=1)", "duplicate_keyword"},
        {"square(cx=1, cy=2, size=3, stroke=0)", "invalid_stroke"},
        {"filled_circle(cx=1, cy=2, radius=0)", "out_of_range"},
        {"filled_circle(cx=99999999999999999999999, cy=2, radius=3)", "out_of_range"},
        {"filled_square(cx=1, cy=2, size=513)", "out_of_range"},
    };
    for (const auto& c : cases) EXPECT_EQ(tag_of(c.program), c.tag) << c.program;
}

TEST(Parser, AcceptedSurface) {
    const Scene canonical = *parse("filled_circle(cx=1, cy=2, radius=3)\n");
    EXPECT_EQ(*parse("filled_circle( cx = 1 , cy = 2 , radius = 3 )"), canonical);
    EXPECT_EQ(*parse("filled_circle(radius=3, cy=2, cx=1)"), canonical);
    EXPECT_EQ(*parse("filled_circle(cx=+1, cy=2, radius=3)"), canonical);
    EXPECT_EQ(*parse("\n\nfilled_circle(\n  cx=1,\n  cy=2,\n  radius=3\n)\n\n"), canonical);
    EXPECT_EQ(*parse("filled_circle(cx=1, cy=2, radius=3)\r\n"), canonical);
    const ParseResult two = parse("square(cx=5, cy=6, size=7, stroke=2)\n\n\ncircle(cx=1, cy=1, radius=4, stroke=4)");
    ASSERT_TRUE(two);
    EXPECT_EQ(two->size(), 2u);
}

TEST(Parser, PrecedenceFirstLineWins) {
    // A structural error on a later line beats a range error on an earlier one.
    EXPECT_EQ(tag_of("filled_circle(cx=-1, cy=0, radius=5)\nimport os"), "disallowed_construct");
    // Among structural errors, the first line wins.
    EXPECT_EQ(tag_of("triangle(cx=1)\nimport os"), "unknown_function");
    // Keyword errors come after all structural checks.
    EXPECT_EQ(tag_of("circle(cx=1, cy=2, radius=3)\nfilled_circle(1, 2, 3)"), "positional_args");
    // Within one call, unexpected/duplicate (left to right) beats missing.
    EXPECT_EQ(tag_of("circle(cx=1, foo=2, radius=3)"), "unexpected_keyword");
    EXPECT_EQ(tag_of("circle(cx=1, cx=2)"), "duplicate_keyword");
    // Range before stroke.
    EXPECT_EQ(tag_of("circle(cx=1000, cy=2, radius=3, stroke=9)"), "out_of_range");
}

TEST(Parser, ErrorCarriesLine) {
    const ParseResult r = parse("filled_circle(cx=1, cy=2, radius=3)\n\nfilled_circle(cx=1, cy=2, radius=0)");
    ASSERT_FALSE(r);
    EXPECT_EQ(r.error().line, 3);
    EXPECT_EQ(classify_error(r.error()), "out_of_range");
    EXPECT_FALSE(r.error().message.empty());
}

TEST(Parser, NonAsciiAndInvalidUtf8) {
    EXPECT_EQ(tag_of("filled_circle(cx=1, cy=2, radius=3)\xff"), "syntax_error");
    EXPECT_EQ(tag_of("\xc3\xa9"), "syntax_error");
}

TEST(Parser, RoundTripRandomScenes) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const Scene s = support::random_scene(rng, 8, 512);
        const ParseResult r = parse(serialize(s));
        ASSERT_TRUE(r) << serialize(s);
        EXPECT_EQ(*r, s);
    }
}

TEST(Parser, FuzzRandomBytes) {
    std::mt19937_64 rng(99);
    const std::string alphabet = "filled_circlesquare(cx=,y radius stroke)0123456789+-.\n\t #*[]{}'\"\\";
    std::uniform_int_distribution<int> len(0, 80), byte(0, 255), coin(0, 1);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    for (int i = 0; i < 20000; ++i) {
        std::string s(static_cast<std::size_t>(len(rng)), '\0');
        const bool structured = coin(rng);
        for (char& ch : s) ch = structured ? alphabet[pick(rng)] : static_cast<char>(byte(rng));
        const ParseResult r = parse(s);
        if (r) {
            EXPECT_FALSE(r->empty());
            for (const Shape& sh : r->shapes) EXPECT_FALSE(validate_shape(sh));
        } else {
            EXPECT_FALSE(tag_name(r.error().tag).empty());
        }
    }
}
