#pragma once

// Tokenizer shared by the annotation-file and precondition parsers.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ancheck/errors.hpp"

namespace ancheck::detail {

enum class Tok {
  Ident,
  AtWord,  // "@arg", "@require", ...
  Int,
  Float,
  String,
  Punct,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier/punct spelling, number digits, decoded string
  std::size_t line = 1;
  std::size_t col = 1;

  bool is(Tok k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return is(Tok::Punct, t); }
  bool is_ident(std::string_view t) const { return is(Tok::Ident, t); }
};

// `#` starts a comment running to end of line. Positions are offset so that
// the first character of `text` sits at (line, col).
std::vector<Token> tokenize(std::string_view text, std::size_t line = 1,
                            std::size_t col = 1);

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const {
    const auto i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::End; }

  bool accept_punct(std::string_view p) {
    if (!peek().is_punct(p)) return false;
    next();
    return true;
  }

  const Token& expect_punct(std::string_view p) {
    if (!peek().is_punct(p)) fail(peek(), "expected '" + std::string(p) + "'");
    return next();
  }

  const Token& expect(Tok kind, std::string_view what) {
    if (peek().kind != kind) fail(peek(), "expected " + std::string(what));
    return next();
  }

  [[noreturn]] static void fail(const Token& at, const std::string& message) {
    throw SyntaxError(at.line, at.col, message + describe(at));
  }

 private:
  static std::string describe(const Token& t) {
    if (t.kind == Tok::End) return " (found end of input)";
    if (t.kind == Tok::String) return " (found string)";
    return " (found '" + t.text + "')";
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// Encodes a code point as UTF-8.
void append_utf8(std::string& out, char32_t cp);

// Number of code points in a UTF-8 string (invalid bytes count as one each).
std::size_t utf8_length(std::string_view s);

// Double-quoted string literal with escapes for quote, backslash and control
// characters.
std::string quote_string(std::string_view s);

}  // namespace ancheck::detail
