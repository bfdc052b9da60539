// SPDX-License-Identifier: Apache-2.0
#include "complint/pyast/lexer.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "complint/pyast/source_text.hpp"

namespace complint {

bool is_valid_utf8(std::string_view s) noexcept {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      ++i;
      continue;
    }
    int len = 0;
    std::uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + static_cast<std::size_t>(len) > n) return false;
    for (int k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += static_cast<std::size_t>(len);
  }
  return true;
}

}  // namespace complint

namespace complint::pyast {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",  "await", "break",
    "class", "continue", "def",   "del",      "elif",     "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",       "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",      "while",  "with",   "yield"};

constexpr int kTabSize = 8;
constexpr int kMaxIndent = 100;
constexpr int kMaxLevel = 200;

bool is_ident_start(int c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 128; }
bool is_ident_char(int c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(int c) { return c >= '0' && c <= '9'; }
bool is_xdigit(int c) { return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }

// Coarse stand-in for unicodedata's XID tables: rejects the punctuation,
// symbol and control blocks that show up in practice (smart quotes, emoji,
// arrows, fullwidth punctuation) and accepts everything else.
bool is_identifier_codepoint(std::uint32_t cp, bool first) {
  if (cp < 0x80) return first ? is_ident_start(static_cast<int>(cp)) : is_ident_char(static_cast<int>(cp));
  if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA || (!first && cp == 0xB7);
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return !first && (cp == 0x203F || cp == 0x2040 || cp == 0x2054);
  if (cp >= 0x2070 && cp <= 0x209F) return cp == 0x2071 || cp == 0x207F || (cp >= 0x2090 && cp <= 0x209C);
  if (cp >= 0x20A0 && cp <= 0x20FF) return false;
  if (cp >= 0x2190 && cp <= 0x2BFF) return false;
  if (cp >= 0x2E00 && cp <= 0x2E7F) return false;
  if ((cp >= 0x3000 && cp <= 0x3004) || (cp >= 0x3008 && cp <= 0x3020) || cp == 0x3030 || cp == 0x303D ||
      cp == 0x30FB)
    return false;
  if (cp >= 0xD800 && cp <= 0xF8FF) return false;
  if (cp >= 0xFE10 && cp <= 0xFE1F) return false;
  if (cp >= 0xFE30 && cp <= 0xFE4F) return !first && (cp == 0xFE33 || cp == 0xFE34 || (cp >= 0xFE4D && cp <= 0xFE4F));
  if (cp >= 0xFE50 && cp <= 0xFE6F) return false;
  if ((cp >= 0xFF00 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
      (cp >= 0xFF5B && cp <= 0xFF65))
    return !first && cp == 0xFF3F;
  if (cp >= 0xFFF0 && cp <= 0xFFFF) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
  if (cp >= 0xE0000) return false;
  return true;
}

bool verify_identifier(std::string_view s) {
  std::size_t i = 0;
  bool first = true;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::uint32_t cp = c;
    int len = 1;
    if (c >= 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else if (c >= 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if (c >= 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if (c >= 0x80) {
      return false;
    }
    if (i + static_cast<std::size_t>(len) > s.size()) return false;
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]) & 0x3F);
    if (!is_identifier_codepoint(cp, first)) return false;
    first = false;
    i += static_cast<std::size_t>(len);
  }
  return true;
}

std::string_view three_char_op(std::string_view s) {
  static constexpr std::array<std::string_view, 5> ops = {"**=", "//=", ">>=", "<<=", "..."};
  for (auto op : ops)
    if (s.substr(0, 3) == op) return op;
  return {};
}

std::string_view two_char_op(std::string_view s) {
  static constexpr std::array<std::string_view, 20> ops = {"!=", "%=", "&=", "**", "*=", "+=", "-=",
                                                           "->", "//", "/=", ":=", "<<", "<=", "<>",
                                                           "==", ">=", ">>", "@=", "^=", "|="};
  const auto two = s.substr(0, 2);
  for (auto op : ops)
    if (two == op) return op;
  return {};
}

class Scanner {
 public:
  Scanner(const std::string& buf, const std::vector<std::size_t>& line_starts, std::vector<Token>& out)
      : buf_(buf), line_starts_(line_starts), out_(out) {
    indstack_[0] = 0;
    altindstack_[0] = 0;
  }

  void run() {
    while (true) {
      if (!next()) break;
      const auto k = out_.back().kind;
      if (k == TokenKind::EndMarker || k == TokenKind::Error) break;
    }
  }

 private:
  int peekc(std::size_t off = 0) const {
    const std::size_t p = pos_ + off;
    return p < buf_.size() ? static_cast<unsigned char>(buf_[p]) : -1;
  }

  // Reads one char; tracks line boundaries and flags end of input.
  int getc() {
    if (pos_ >= buf_.size()) {
      hit_eof_ = true;
      return -1;
    }
    const int c = static_cast<unsigned char>(buf_[pos_++]);
    if (c == '\n') {
      ++line_;
      line_start_ = pos_;
    }
    return c;
  }

  int col_of(std::size_t p) const {
    // column within the line that contains p
    std::size_t ls = p;
    while (ls > 0 && buf_[ls - 1] != '\n') --ls;
    return static_cast<int>(p - ls);
  }

  int line_of(std::size_t p) const {
    // binary search over line starts
    std::size_t lo = 0, hi = line_starts_.size() - 1;
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (line_starts_[mid] <= p)
        lo = mid;
      else
        hi = mid;
    }
    return static_cast<int>(lo) + 1;
  }

  int last_line() const { return static_cast<int>(line_starts_.size()) - 1 > 0 ? static_cast<int>(line_starts_.size()) - 1 : 1; }

  void emit(TokenKind kind, std::size_t start, std::size_t end) {
    Token t;
    t.kind = kind;
    t.text = std::string_view(buf_).substr(start, end - start);
    t.line = line_of(start);
    t.col = col_of(start);
    if (end > start) {
      t.end_line = line_of(end - 1);
      t.end_col = col_of(end - 1) + 1;
    } else {
      t.end_line = t.line;
      t.end_col = t.col;
    }
    t.at_eof = hit_eof_;
    out_.push_back(std::move(t));
  }

  void emit_marker(TokenKind kind) {
    Token t;
    t.kind = kind;
    if (hit_eof_) {
      t.line = last_line();
      t.col = 0;
    } else {
      t.line = line_of(pos_ < buf_.size() ? pos_ : buf_.size() - 1);
      t.col = col_of(pos_);
    }
    t.end_line = t.line;
    t.end_col = t.col;
    t.at_eof = hit_eof_;
    out_.push_back(std::move(t));
  }

  void emit_error(std::string message, int line, int col, ErrorClass cls = ErrorClass::Syntax, bool eof = false) {
    Token t;
    t.kind = TokenKind::Error;
    t.line = line;
    t.col = col;
    t.end_line = line;
    t.end_col = col;
    t.message = std::move(message);
    t.error_class = cls;
    t.eof_error = eof;
    t.at_eof = hit_eof_;
    out_.push_back(std::move(t));
  }

  void error_here(std::string message) {
    const std::size_t p = pos_ > 0 ? pos_ : 0;
    emit_error(std::move(message), line_, static_cast<int>(p - line_start_));
  }

  // Returns false once a terminal token was emitted.
  bool next() {
    if (pendin_ != 0) return emit_pending();
    if (atbol_) {
      atbol_ = false;
      int col = 0, altcol = 0;
      int c;
      while (true) {
        c = peekc();
        if (c == ' ') {
          ++col;
          ++altcol;
        } else if (c == '\t') {
          col = (col / kTabSize + 1) * kTabSize;
          altcol = altcol + 1;
        } else if (c == '\014') {
          col = altcol = 0;
        } else {
          break;
        }
        getc();
      }
      if (c == -1) hit_eof_ = true;
      const bool blankline = (c == '#' || c == '\n');
      blankline_ = blankline;
      if (!blankline && level_ == 0) {
        if (col == indstack_[indent_]) {
          if (altcol != altindstack_[indent_]) return tab_error();
        } else if (col > indstack_[indent_]) {
          if (indent_ + 1 >= kMaxIndent) {
            emit_error("too many levels of indentation", line_, 0, ErrorClass::Indentation);
            return false;
          }
          if (altcol <= altindstack_[indent_]) return tab_error();
          ++pendin_;
          ++indent_;
          indstack_[indent_] = col;
          altindstack_[indent_] = altcol;
        } else {
          while (indent_ > 0 && col < indstack_[indent_]) {
            --pendin_;
            --indent_;
          }
          if (col != indstack_[indent_]) {
            emit_error("unindent does not match any outer indentation level", line_, col,
                       ErrorClass::Indentation);
            return false;
          }
          if (altcol != altindstack_[indent_]) return tab_error();
        }
      }
    }
    if (pendin_ != 0) return emit_pending();
    return scan_token();
  }

  bool tab_error() {
    emit_error("inconsistent use of tabs and spaces in indentation", line_, 0, ErrorClass::Tab);
    return false;
  }

  bool emit_pending() {
    if (pendin_ < 0) {
      ++pendin_;
      emit_marker(TokenKind::Dedent);
    } else {
      --pendin_;
      emit_marker(TokenKind::Indent);
    }
    return true;
  }

  bool scan_token() {
  again:
    int c = peekc();
    while (c == ' ' || c == '\t' || c == '\014') {
      getc();
      c = peekc();
    }
    if (c == '#') {
      while (peekc() != '\n' && peekc() != -1) getc();
      c = peekc();
    }
    const std::size_t start = pos_;
    if (c == -1) {
      hit_eof_ = true;
      emit_marker(TokenKind::EndMarker);
      return false;
    }

    if (is_ident_start(c)) return scan_name_or_prefixed_string(start);

    if (c == '\n') {
      getc();
      atbol_ = true;
      if (blankline_ || level_ > 0) return next();
      emit(TokenKind::Newline, start, pos_);
      return true;
    }

    if (c == '.') {
      if (is_digit(peekc(1))) {
        getc();
        return scan_fraction(start);
      }
      if (peekc(1) == '.' && peekc(2) == '.') {
        pos_ += 3;
        emit(TokenKind::Op, start, pos_);
        return true;
      }
      getc();
      emit(TokenKind::Op, start, pos_);
      return true;
    }

    if (is_digit(c)) return scan_number(start);

    if (c == '\'' || c == '"') return scan_string(start, pos_);

    if (c == '\\') {
      getc();
      const int nc = peekc();
      if (nc != '\n') {
        emit_error("unexpected character after line continuation character", line_,
                   static_cast<int>(pos_ - line_start_));
        return false;
      }
      getc();
      if (peekc() == -1) {
        hit_eof_ = true;
        emit_error("unexpected EOF while parsing", line_ > 1 ? line_ - 1 : 1, 0, ErrorClass::Syntax, true);
        return false;
      }
      goto again;
    }

    const std::string_view rest = std::string_view(buf_).substr(pos_);
    std::string_view op = three_char_op(rest);
    if (op.empty()) op = two_char_op(rest);
    if (!op.empty()) {
      pos_ += op.size();
      emit(TokenKind::Op, start, pos_);
      return true;
    }

    switch (c) {
      case '(':
      case '[':
      case '{':
        if (level_ >= kMaxLevel) {
          error_here("too many nested parentheses");
          return false;
        }
        paren_[level_] = static_cast<char>(c);
        paren_line_[level_] = line_;
        ++level_;
        break;
      case ')':
      case ']':
      case '}': {
        if (level_ == 0) {
          getc();
          error_here(std::string("unmatched '") + static_cast<char>(c) + "'");
          return false;
        }
        --level_;
        const char opening = paren_[level_];
        if (!((opening == '(' && c == ')') || (opening == '[' && c == ']') || (opening == '{' && c == '}'))) {
          getc();
          std::string msg = std::string("closing parenthesis '") + static_cast<char>(c) +
                            "' does not match opening parenthesis '" + opening + "'";
          if (paren_line_[level_] != line_) msg += " on line " + std::to_string(paren_line_[level_]);
          error_here(std::move(msg));
          return false;
        }
        break;
      }
      default:
        break;
    }
    getc();
    emit(TokenKind::Op, start, pos_);
    return true;
  }

  bool scan_name_or_prefixed_string(std::size_t start) {
    bool saw_b = false, saw_r = false, saw_u = false, saw_f = false;
    while (true) {
      const int c = peekc();
      if (!saw_b && !saw_u && !saw_f && (c == 'b' || c == 'B'))
        saw_b = true;
      else if (!saw_b && !saw_u && !saw_r && !saw_f && (c == 'u' || c == 'U'))
        saw_u = true;
      else if (!saw_r && !saw_u && (c == 'r' || c == 'R'))
        saw_r = true;
      else if (!saw_f && !saw_b && !saw_u && (c == 'f' || c == 'F'))
        saw_f = true;
      else
        break;
      getc();
      const int q = peekc();
      if (q == '"' || q == '\'') return scan_string(start, pos_);
    }
    bool nonascii = false;
    while (is_ident_char(peekc())) {
      if (peekc() >= 128) nonascii = true;
      getc();
    }
    if (nonascii && !verify_identifier(std::string_view(buf_).substr(start, pos_ - start))) {
      emit_error("invalid character in identifier", line_, col_of(start));
      return false;
    }
    emit(TokenKind::Name, start, pos_);
    return true;
  }

  bool scan_string(std::size_t start, std::size_t quote_pos) {
    pos_ = quote_pos;
    const int quote = getc();
    int quote_size = 1;
    int end_quote_size = 0;
    if (peekc() == quote) {
      getc();
      if (peekc() == quote) {
        getc();
        quote_size = 3;
      } else {
        end_quote_size = 1;  // empty string
      }
    }
    while (end_quote_size != quote_size) {
      int c = getc();
      if (c == -1) {
        if (quote_size == 3)
          emit_error("EOF while scanning triple-quoted string literal", last_line(), 0, ErrorClass::Syntax, true);
        else
          emit_error("EOL while scanning string literal", last_line(), 0, ErrorClass::Syntax, true);
        return false;
      }
      if (quote_size == 1 && c == '\n') {
        emit_error("EOL while scanning string literal", line_ - 1,
                   static_cast<int>(pos_ - 1 - line_starts_[static_cast<std::size_t>(line_ - 2)]),
                   ErrorClass::Syntax, false);
        return false;
      }
      if (c == quote) {
        ++end_quote_size;
      } else {
        end_quote_size = 0;
        if (c == '\\') {
          if (getc() == -1) {
            if (quote_size == 3)
              emit_error("EOF while scanning triple-quoted string literal", last_line(), 0, ErrorClass::Syntax,
                         true);
            else
              emit_error("EOL while scanning string literal", last_line(), 0, ErrorClass::Syntax, true);
            return false;
          }
        }
      }
    }
    emit(TokenKind::String, start, pos_);
    return true;
  }

  // Consumes digits with single underscores between them. Returns false and
  // emits on a misplaced underscore.
  bool decimal_tail() {
    while (true) {
      while (is_digit(peekc())) getc();
      if (peekc() != '_') break;
      getc();
      if (!is_digit(peekc())) {
        error_here("invalid decimal literal");
        return false;
      }
    }
    return true;
  }

  bool scan_number(std::size_t start) {
    int c = peekc();
    if (c == '0') {
      getc();
      c = peekc();
      if (c == 'x' || c == 'X') {
        getc();
        do {
          if (peekc() == '_') getc();
          if (!is_xdigit(peekc())) {
            error_here("invalid hexadecimal literal");
            return false;
          }
          while (is_xdigit(peekc())) getc();
        } while (peekc() == '_');
        emit(TokenKind::Number, start, pos_);
        return true;
      }
      if (c == 'o' || c == 'O') {
        getc();
        do {
          if (peekc() == '_') getc();
          if (peekc() < '0' || peekc() >= '8') {
            if (is_digit(peekc()))
              error_here(std::string("invalid digit '") + static_cast<char>(peekc()) + "' in octal literal");
            else
              error_here("invalid octal literal");
            return false;
          }
          while (peekc() >= '0' && peekc() < '8') getc();
        } while (peekc() == '_');
        if (is_digit(peekc())) {
          error_here(std::string("invalid digit '") + static_cast<char>(peekc()) + "' in octal literal");
          return false;
        }
        emit(TokenKind::Number, start, pos_);
        return true;
      }
      if (c == 'b' || c == 'B') {
        getc();
        do {
          if (peekc() == '_') getc();
          if (peekc() != '0' && peekc() != '1') {
            if (is_digit(peekc()))
              error_here(std::string("invalid digit '") + static_cast<char>(peekc()) + "' in binary literal");
            else
              error_here("invalid binary literal");
            return false;
          }
          while (peekc() == '0' || peekc() == '1') getc();
        } while (peekc() == '_');
        if (is_digit(peekc())) {
          error_here(std::string("invalid digit '") + static_cast<char>(peekc()) + "' in binary literal");
          return false;
        }
        emit(TokenKind::Number, start, pos_);
        return true;
      }
      bool nonzero = false;
      while (true) {
        if (peekc() == '_') {
          getc();
          if (!is_digit(peekc())) {
            error_here("invalid decimal literal");
            return false;
          }
        }
        if (peekc() != '0') break;
        getc();
      }
      if (is_digit(peekc())) {
        nonzero = true;
        if (!decimal_tail()) return false;
      }
      c = peekc();
      if (c == '.') {
        getc();
        return scan_fraction(start);
      }
      if (c == 'e' || c == 'E') return scan_exponent(start);
      if (c == 'j' || c == 'J') {
        getc();
        emit(TokenKind::Number, start, pos_);
        return true;
      }
      if (nonzero) {
        error_here(
            "leading zeros in decimal integer literals are not permitted; use an 0o prefix for octal integers");
        return false;
      }
      emit(TokenKind::Number, start, pos_);
      return true;
    }
    if (!decimal_tail()) return false;
    c = peekc();
    if (c == '.') {
      getc();
      return scan_fraction(start);
    }
    if (c == 'e' || c == 'E') return scan_exponent(start);
    if (c == 'j' || c == 'J') getc();
    emit(TokenKind::Number, start, pos_);
    return true;
  }

  // Called with the '.' already consumed.
  bool scan_fraction(std::size_t start) {
    if (is_digit(peekc()) && !decimal_tail()) return false;
    const int c = peekc();
    if (c == 'e' || c == 'E') return scan_exponent(start);
    if (c == 'j' || c == 'J') getc();
    emit(TokenKind::Number, start, pos_);
    return true;
  }

  bool scan_exponent(std::size_t start) {
    // at 'e'
    const std::size_t e_pos = pos_;
    getc();
    int c = peekc();
    if (c == '+' || c == '-') {
      getc();
      c = peekc();
      if (!is_digit(c)) {
        error_here("invalid decimal literal");
        return false;
      }
    } else if (!is_digit(c)) {
      // "1e" followed by a name: the 'e' starts the next token
      pos_ = e_pos;
      emit(TokenKind::Number, start, pos_);
      return true;
    }
    if (!decimal_tail()) return false;
    if (peekc() == 'j' || peekc() == 'J') getc();
    emit(TokenKind::Number, start, pos_);
    return true;
  }

  const std::string& buf_;
  const std::vector<std::size_t>& line_starts_;
  std::vector<Token>& out_;

  std::size_t pos_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
  bool atbol_ = true;
  bool blankline_ = false;
  bool hit_eof_ = false;
  int pendin_ = 0;
  int indent_ = 0;
  std::array<int, kMaxIndent> indstack_{};
  std::array<int, kMaxIndent> altindstack_{};
  int level_ = 0;
  std::array<char, kMaxLevel> paren_{};
  std::array<int, kMaxLevel> paren_line_{};
};

}  // namespace

bool is_keyword(std::string_view name) noexcept {
  for (auto kw : kKeywords)
    if (kw == name) return true;
  return false;
}

Lexer::Lexer(std::string_view source) {
  if (source.substr(0, 3) == "\xEF\xBB\xBF") source.remove_prefix(3);
  buf_.reserve(source.size() + 1);
  for (std::size_t i = 0; i < source.size(); ++i) {
    const char c = source[i];
    if (c == '\r') {
      buf_.push_back('\n');
      if (i + 1 < source.size() && source[i + 1] == '\n') ++i;
    } else {
      buf_.push_back(c);
    }
  }
  if (buf_.empty() || buf_.back() != '\n') buf_.push_back('\n');
  line_starts_.push_back(0);
  for (std::size_t i = 0; i < buf_.size(); ++i)
    if (buf_[i] == '\n') line_starts_.push_back(i + 1);
  run();
}

void Lexer::run() {
  Scanner scanner(buf_, line_starts_, tokens_);
  scanner.run();
}

std::string_view Lexer::line_text(int line) const noexcept {
  if (line < 1 || static_cast<std::size_t>(line) >= line_starts_.size()) return {};
  const std::size_t b = line_starts_[static_cast<std::size_t>(line) - 1];
  const std::size_t e = line_starts_[static_cast<std::size_t>(line)] - 1;
  return std::string_view(buf_).substr(b, e - b);
}

}  // namespace complint::pyast
