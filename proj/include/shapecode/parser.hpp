#pragma once

// Strict whitelist parser for the four-primitive drawing language.
//
// Accepted surface: a sequence of `name(kw=int, ...)` calls separated by
// newlines. Newlines inside an open bracket continue the statement. Integer
// literals may carry one unary sign. Every rejection yields exactly one tag,
// chosen by a fixed precedence:
//
//   1. empty_program (blank input)
//   2. per statement in line order: syntax_error, disallowed_construct,
//      unknown_function, positional_args, non_integer_literal
//   3. per call in line order: unexpected_keyword / duplicate_keyword
//      (first offending keyword, left to right), then missing_keyword
//   4. per shape in line order: out_of_range, then invalid_stroke

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shapecode/dsl.hpp"
#include "shapecode/result.hpp"

namespace shapecode {

enum class ErrorTag : std::uint8_t {
    EmptyProgram,
    SyntaxError,
    DisallowedConstruct,
    UnknownFunction,
    PositionalArgs,
    NonIntegerLiteral,
    DuplicateKeyword,
    UnexpectedKeyword,
    MissingKeyword,
    OutOfRange,
    InvalidStroke,
};

inline constexpr std::array<ErrorTag, 11> kAllErrorTags = {
    ErrorTag::EmptyProgram,      ErrorTag::SyntaxError,      ErrorTag::DisallowedConstruct,
    ErrorTag::UnknownFunction,   ErrorTag::PositionalArgs,   ErrorTag::NonIntegerLiteral,
    ErrorTag::DuplicateKeyword,  ErrorTag::UnexpectedKeyword, ErrorTag::MissingKeyword,
    ErrorTag::OutOfRange,        ErrorTag::InvalidStroke,
};

constexpr std::string_view tag_name(ErrorTag t) noexcept {
    switch (t) {
        case ErrorTag::EmptyProgram: return "empty_program";
        case ErrorTag::SyntaxError: return "syntax_error";
        case ErrorTag::DisallowedConstruct: return "disallowed_construct";
        case ErrorTag::UnknownFunction: return "unknown_function";
        case ErrorTag::PositionalArgs: return "positional_args";
        case ErrorTag::NonIntegerLiteral: return "non_integer_literal";
        case ErrorTag::DuplicateKeyword: return "duplicate_keyword";
        case ErrorTag::UnexpectedKeyword: return "unexpected_keyword";
        case ErrorTag::MissingKeyword: return "missing_keyword";
        case ErrorTag::OutOfRange: return "out_of_range";
        case ErrorTag::InvalidStroke: return "invalid_stroke";
    }
    return "";
}

struct ParseError {
    ErrorTag tag = ErrorTag::SyntaxError;
    std::optional<int> line;  // 1-based
    std::string message;
};

/// Stable taxonomy vocabulary for downstream consumers.
inline std::string_view classify_error(const ParseError& err) noexcept { return tag_name(err.tag); }

using ParseResult = Result<Scene, ParseError>;

namespace detail {

enum class Tok : std::uint8_t {
    Name, Int, Number, String, LParen, RParen, LBracket, RBracket, LBrace, RBrace,
    Comma, Equals, Plus, Minus, Star, Dot, Other,
};

struct Token {
    Tok kind;
    std::string_view text;
    int line;
};

struct Statement {
    std::vector<Token> tokens;
    int line = 1;
};

struct LexOutcome {
    std::vector<Statement> statements;
    std::optional<ParseError> error;  // lexing stopped here; follows all complete statements
};

constexpr bool is_ident_start(char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
constexpr bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }
constexpr bool is_ident_char(char c) noexcept { return is_ident_start(c) || is_digit(c); }
constexpr bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

// Validates UTF-8 sequences (no overlongs, no surrogates, max U+10FFFF).
inline bool valid_utf8(std::string_view s) noexcept {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len;
        std::uint32_t cp;
        if (c < 0x80) { ++i; continue; }
        if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
        else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
        else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; }
        else return false;
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

inline ParseError make_error(ErrorTag tag, int line, std::string message) {
    return ParseError{tag, line, std::move(message)};
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    LexOutcome run() {
        LexOutcome out;
        Statement current;
        std::vector<char> open;  // pending closing brackets
        auto flush = [&] {
            if (!current.tokens.empty()) out.statements.push_back(std::move(current));
            current = Statement{};
        };
        auto fail = [&](std::string msg, int line) {
            out.error = make_error(ErrorTag::SyntaxError, line, std::move(msg));
            return std::move(out);
        };

        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
                if (open.empty()) flush();
                continue;
            }
            if (is_space(c)) { ++pos_; continue; }
            if (current.tokens.empty()) current.line = line_;

            if (static_cast<unsigned char>(c) >= 0x80) return fail("non-ASCII character outside a string literal", line_);
            if (c == '#') return fail("comments are not allowed", line_);
            if (c == '\\') return fail("line continuation is not allowed", line_);

            const std::size_t start = pos_;
            const int tok_line = line_;
            if (is_ident_start(c)) {
                while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
                push(current, Tok::Name, start, tok_line);
                continue;
            }
            if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
                lex_number();
                const std::string_view text = src_.substr(start, pos_ - start);
                push(current, is_decimal_int(text) ? Tok::Int : Tok::Number, start, tok_line);
                continue;
            }
            if (c == '"' || c == '\'') {
                if (!lex_string(c)) return fail("unterminated or malformed string literal", tok_line);
                push(current, Tok::String, start, tok_line);
                continue;
            }
            ++pos_;
            switch (c) {
                case '(': open.push_back(')'); push(current, Tok::LParen, start, tok_line); break;
                case '[': open.push_back(']'); push(current, Tok::LBracket, start, tok_line); break;
                case '{': open.push_back('}'); push(current, Tok::LBrace, start, tok_line); break;
                case ')': case ']': case '}':
                    if (open.empty() || open.back() != c)
                        return fail(std::string("unbalanced '") + c + "'", tok_line);
                    open.pop_back();
                    push(current, c == ')' ? Tok::RParen : c == ']' ? Tok::RBracket : Tok::RBrace, start, tok_line);
                    break;
                case ',': push(current, Tok::Comma, start, tok_line); break;
                case '=': push(current, Tok::Equals, start, tok_line); break;
                case '+': push(current, Tok::Plus, start, tok_line); break;
                case '-': push(current, Tok::Minus, start, tok_line); break;
                case '*': push(current, Tok::Star, start, tok_line); break;
                case '.': push(current, Tok::Dot, start, tok_line); break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20 || c == 0x7F)
                        return fail("control character in program text", tok_line);
                    push(current, Tok::Other, start, tok_line);
                    break;
            }
        }
        if (!open.empty()) return fail("unclosed bracket", current.line);
        flush();
        return out;
    }

private:
    void push(Statement& st, Tok kind, std::size_t start, int line) {
        st.tokens.push_back(Token{kind, src_.substr(start, pos_ - start), line});
    }

    void lex_number() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (is_ident_char(c) || c == '.') {
                ++pos_;
            } else if ((c == '+' || c == '-') && (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E') &&
                       !looks_hex(pos_)) {
                ++pos_;  // exponent sign
            } else {
                break;
            }
        }
    }

    bool looks_hex(std::size_t upto) const {
        std::size_t b = upto;
        while (b > 0 && (is_ident_char(src_[b - 1]) || src_[b - 1] == '.')) --b;
        return upto - b >= 2 && src_[b] == '0' && (src_[b + 1] == 'x' || src_[b + 1] == 'X');
    }

    bool lex_string(char quote) {
        const std::size_t start = pos_;
        ++pos_;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\\') { pos_ += 2; continue; }
            if (c == '\n') return false;
            ++pos_;
            if (c == quote) return valid_utf8(src_.substr(start, pos_ - start));
        }
        return false;
    }

    static bool is_decimal_int(std::string_view t) noexcept {
        if (t.empty() || !std::all_of(t.begin(), t.end(), is_digit)) return false;
        // Leading zeros only as all-zero literals, e.g. "0" or "00".
        return t[0] != '0' || std::all_of(t.begin(), t.end(), [](char c) { return c == '0'; });
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

inline constexpr std::string_view kStatementKeywords[] = {
    "import", "from",   "for",    "while",    "if",       "elif",   "else",  "def",
    "class",  "return", "with",   "lambda",   "try",      "except", "finally", "del",
    "pass",   "global", "nonlocal", "assert", "raise",    "yield",  "async", "await",
    "break",  "continue",
};

inline bool is_statement_keyword(std::string_view name) noexcept {
    return std::find(std::begin(kStatementKeywords), std::end(kStatementKeywords), name) !=
           std::end(kStatementKeywords);
}

struct KeywordArg {
    std::string_view name;
    std::int64_t value;
    int line;
};

struct RawCall {
    ShapeKind kind;
    int line;
    std::vector<KeywordArg> args;
};

constexpr bool opens(Tok k) noexcept { return k == Tok::LParen || k == Tok::LBracket || k == Tok::LBrace; }
constexpr bool closes(Tok k) noexcept { return k == Tok::RParen || k == Tok::RBracket || k == Tok::RBrace; }

using TokenSpan = std::pair<const Token*, const Token*>;

inline bool has_nested_call(TokenSpan span) noexcept {
    for (const Token* t = span.first; t + 1 < span.second; ++t)
        if (t->kind == Tok::Name && (t + 1)->kind == Tok::LParen) return true;
    return false;
}

inline std::int64_t saturating_decimal(std::string_view digits) noexcept {
    constexpr std::int64_t kCap = std::int64_t{1} << 62;
    std::int64_t v = 0;
    for (char c : digits) {
        v = v * 10 + (c - '0');
        if (v >= kCap) return kCap;
    }
    return v;
}

/// Structural analysis of one statement into a call with integer keyword args.
inline Result<RawCall, ParseError> analyze_statement(const Statement& st) {
    const auto& toks = st.tokens;
    const int line = st.line;
    const Token& first = toks.front();

    if (first.kind == Tok::Name && is_statement_keyword(first.text))
        return make_error(ErrorTag::DisallowedConstruct, line, "statement '" + std::string(first.text) + "' is not allowed");
    if (first.kind == Tok::Star)
        return make_error(ErrorTag::DisallowedConstruct, line, "starred expression at statement level");

    // Assignment: any '=' outside brackets.
    {
        int depth = 0;
        for (const Token& t : toks) {
            if (opens(t.kind)) ++depth;
            else if (closes(t.kind)) --depth;
            else if (depth == 0 && t.kind == Tok::Equals)
                return make_error(ErrorTag::DisallowedConstruct, line, "assignment is not allowed");
        }
    }
    if (first.kind == Tok::Name && toks.size() > 1 && toks[1].kind == Tok::Dot)
        return make_error(ErrorTag::DisallowedConstruct, line, "attribute access is not allowed");
    if (first.kind != Tok::Name || toks.size() < 2 || toks[1].kind != Tok::LParen)
        return make_error(ErrorTag::SyntaxError, line, "expected a call of the form name(keyword=value, ...)");

    // Locate the matching ')' of the call.
    std::size_t close = 0;
    {
        int depth = 0;
        for (std::size_t i = 1; i < toks.size(); ++i) {
            if (opens(toks[i].kind)) ++depth;
            else if (closes(toks[i].kind) && --depth == 0) { close = i; break; }
        }
    }
    if (close + 1 < toks.size()) {
        if (toks[close + 1].kind == Tok::Dot)
            return make_error(ErrorTag::DisallowedConstruct, line, "attribute access is not allowed");
        return make_error(ErrorTag::SyntaxError, toks[close + 1].line, "unexpected tokens after call");
    }

    const auto kind = kind_from_name(first.text);
    if (!kind) return make_error(ErrorTag::UnknownFunction, line, "unknown function '" + std::string(first.text) + "'");

    // Split arguments at top-level commas.
    std::vector<TokenSpan> args;
    if (close > 2) {
        const Token* begin = &toks[2];
        int depth = 0;
        for (std::size_t i = 2; i <= close; ++i) {
            const Token& t = toks[i];
            if (i == close || (depth == 0 && t.kind == Tok::Comma)) {
                args.emplace_back(begin, &t);
                begin = &t + 1;
                continue;
            }
            if (opens(t.kind)) ++depth;
            else if (closes(t.kind)) --depth;
        }
    }

    RawCall call{*kind, line, {}};
    for (const auto& span : args) {
        const auto n = span.second - span.first;
        if (n == 0) return make_error(ErrorTag::SyntaxError, line, "empty argument (stray or trailing comma)");
        const Token& a0 = *span.first;
        if (a0.kind == Tok::Star) return make_error(ErrorTag::DisallowedConstruct, a0.line, "starred arguments are not allowed");
        const bool keyword = n >= 2 && a0.kind == Tok::Name && span.first[1].kind == Tok::Equals;
        if (!keyword) {
            if (a0.kind == Tok::Equals) return make_error(ErrorTag::SyntaxError, a0.line, "missing keyword name before '='");
            if (has_nested_call(span)) return make_error(ErrorTag::DisallowedConstruct, a0.line, "nested calls are not allowed");
            return make_error(ErrorTag::PositionalArgs, a0.line, "arguments must be passed by keyword");
        }
        const TokenSpan value{span.first + 2, span.second};
        const auto vn = value.second - value.first;
        if (vn == 0) return make_error(ErrorTag::SyntaxError, a0.line, "missing value for keyword '" + std::string(a0.text) + "'");
        if (has_nested_call(value)) return make_error(ErrorTag::DisallowedConstruct, a0.line, "nested calls are not allowed");

        const Token* lit = value.first;
        bool negative = false;
        if (vn == 2 && (lit->kind == Tok::Plus || lit->kind == Tok::Minus)) {
            negative = lit->kind == Tok::Minus;
            ++lit;
        } else if (vn != 1) {
            lit = nullptr;
        }
        if (lit == nullptr || lit->kind != Tok::Int)
            return make_error(ErrorTag::NonIntegerLiteral, a0.line,
                              "value of '" + std::string(a0.text) + "' is not an integer literal");
        const std::int64_t mag = saturating_decimal(lit->text);
        call.args.push_back(KeywordArg{a0.text, negative ? -mag : mag, a0.line});
    }
    return call;
}

inline std::optional<ParseError> check_keywords(const RawCall& call) {
    const std::string_view name = kind_name(call.kind);
    std::vector<std::string_view> expected = {"cx", "cy", extent_keyword(call.kind)};
    if (is_hollow(call.kind)) expected.emplace_back("stroke");

    std::vector<std::string_view> seen;
    for (const KeywordArg& a : call.args) {
        if (std::find(expected.begin(), expected.end(), a.name) == expected.end())
            return make_error(ErrorTag::UnexpectedKeyword, a.line,
                              std::string(name) + "() got an unexpected keyword '" + std::string(a.name) + "'");
        if (std::find(seen.begin(), seen.end(), a.name) != seen.end())
            return make_error(ErrorTag::DuplicateKeyword, a.line,
                              std::string(name) + "() got keyword '" + std::string(a.name) + "' twice");
        seen.push_back(a.name);
    }
    for (std::string_view kw : expected)
        if (std::find(seen.begin(), seen.end(), kw) == seen.end())
            return make_error(ErrorTag::MissingKeyword, call.line,
                              std::string(name) + "() is missing keyword '" + std::string(kw) + "'");
    return std::nullopt;
}

inline int clamp_to_int(std::int64_t v) noexcept {
    // Anything outside int range is out of range for every parameter anyway.
    constexpr std::int64_t kLim = 1 << 30;
    return static_cast<int>(std::clamp<std::int64_t>(v, -kLim, kLim));
}

inline Shape build_shape(const RawCall& call) {
    Shape s;
    s.kind = call.kind;
    for (const KeywordArg& a : call.args) {
        const int v = clamp_to_int(a.value);
        if (a.name == "cx") s.cx = v;
        else if (a.name == "cy") s.cy = v;
        else if (a.name == "stroke") s.stroke = v;
        else s.extent = v;
    }
    return s;
}

}  // namespace detail

inline bool is_blank(std::string_view text) noexcept {
    return std::all_of(text.begin(), text.end(), [](char c) { return c == '\n' || detail::is_space(c); });
}

/// Parses program text into a nonempty, fully validated scene.
inline ParseResult parse(std::string_view text) {
    using namespace detail;
    if (is_blank(text)) return make_error(ErrorTag::EmptyProgram, 1, "program is empty");

    LexOutcome lexed = Lexer(text).run();
    std::vector<RawCall> calls;
    calls.reserve(lexed.statements.size());
    for (const Statement& st : lexed.statements) {
        auto call = analyze_statement(st);
        if (!call) return call.error();
        calls.push_back(std::move(call).value());
    }
    if (lexed.error) return *lexed.error;
    if (calls.empty()) return make_error(ErrorTag::EmptyProgram, 1, "program is empty");

    for (const RawCall& call : calls)
        if (auto err = check_keywords(call)) return *err;

    Scene scene;
    scene.shapes.reserve(calls.size());
    for (const RawCall& call : calls) {
        Shape s = build_shape(call);
        if (auto v = validate_shape(s)) {
            const ErrorTag tag = *v == ValidationError::OutOfRange ? ErrorTag::OutOfRange : ErrorTag::InvalidStroke;
            return make_error(tag, call.line, serialize_shape(s) + ": " + std::string(validation_tag(*v)));
        }
        scene.shapes.push_back(s);
    }
    return scene;
}

}  // namespace shapecode
