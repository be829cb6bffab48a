#include "lexer.hpp"

#include <cctype>

namespace ancheck::detail {

namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string quote_string(std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7F) {
          out += "\\u00";
          out += kHex[(static_cast<unsigned char>(c) >> 4) & 0xF];
          out += kHex[static_cast<unsigned char>(c) & 0xF];
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

std::vector<Token> tokenize(std::string_view text, std::size_t line,
                            std::size_t col) {
  std::vector<Token> out;
  std::size_t i = 0;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n' || c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }

    Token tok;
    tok.line = line;
    tok.col = col;

    if (ident_start(c) || (c == '@' && i + 1 < text.size() && ident_start(text[i + 1]))) {
      std::size_t j = i + 1;
      while (j < text.size() && ident_char(text[j])) ++j;
      tok.kind = c == '@' ? Tok::AtWord : Tok::Ident;
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool is_float = false;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j + 1 < text.size() && text[j] == '.' &&
          std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        is_float = true;
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      } else if (j < text.size() && text[j] == '.' &&
                 !(j + 1 < text.size() && ident_start(text[j + 1]))) {
        // "1." is a float.
        is_float = true;
        ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          is_float = true;
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      if (j < text.size() && ident_start(text[j])) {
        throw SyntaxError(line, col, "malformed number");
      }
      tok.kind = is_float ? Tok::Float : Tok::Int;
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (c == '"' || c == '\'') {
      const char quote = c;
      tok.kind = Tok::String;
      advance(1);
      bool closed = false;
      while (i < text.size()) {
        const char d = text[i];
        if (d == quote) {
          advance(1);
          closed = true;
          break;
        }
        if (d == '\n') break;
        if (d != '\\') {
          tok.text += d;
          advance(1);
          continue;
        }
        if (i + 1 >= text.size()) break;
        const char e = text[i + 1];
        switch (e) {
          case 'n':
            tok.text += '\n';
            break;
          case 't':
            tok.text += '\t';
            break;
          case 'r':
            tok.text += '\r';
            break;
          case '\\':
          case '"':
          case '\'':
            tok.text += e;
            break;
          case 'u': {
            char32_t cp = 0;
            for (std::size_t k = 0; k < 4; ++k) {
              const int h = i + 2 + k < text.size() ? hex_digit(text[i + 2 + k]) : -1;
              if (h < 0) throw SyntaxError(line, col, "malformed \\u escape");
              cp = cp * 16 + static_cast<char32_t>(h);
            }
            append_utf8(tok.text, cp);
            advance(4);
            break;
          }
          default:
            throw SyntaxError(line, col, std::string("unknown escape '\\") + e + "'");
        }
        advance(2);
      }
      if (!closed) throw SyntaxError(tok.line, tok.col, "unterminated string");
    } else {
      static constexpr std::string_view kTwo[] = {"==", "!=", "<=", ">="};
      tok.kind = Tok::Punct;
      for (auto two : kTwo) {
        if (text.substr(i, 2) == two) tok.text = std::string(two);
      }
      if (tok.text.empty()) {
        static constexpr std::string_view kOne = "()[]{},:=<>+-*/%.";
        if (kOne.find(c) == std::string_view::npos) {
          throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
        }
        tok.text = std::string(1, c);
      }
      advance(tok.text.size());
    }
    out.push_back(std::move(tok));
  }

  Token end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

}  // namespace ancheck::detail
