// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace complint::pyast {

enum class TokenKind : std::uint8_t {
  Name,
  Number,
  String,
  Op,
  Newline,
  Indent,
  Dedent,
  EndMarker,
  Error,
};

/// Exception class CPython would raise for a tokenizer/parser failure.
enum class ErrorClass : std::uint8_t { Syntax, Indentation, Tab };

struct Token {
  TokenKind kind = TokenKind::EndMarker;
  std::string_view text;  // view into the lexer's normalized buffer
  int line = 1;           // 1-based
  int col = 0;            // 0-based byte column
  int end_line = 1;
  int end_col = 0;
  /// Produced after the tokenizer ran out of input (trailing DEDENTs,
  /// ENDMARKER, EOF inside a continuation). A parse failure on such a token
  /// is reported as "unexpected EOF while parsing".
  bool at_eof = false;

  // Populated for TokenKind::Error only.
  std::string message;
  ErrorClass error_class = ErrorClass::Syntax;
  bool eof_error = false;  // the error itself is an EOF condition

  bool is_op(std::string_view s) const noexcept { return kind == TokenKind::Op && text == s; }
};

bool is_keyword(std::string_view name) noexcept;

}  // namespace complint::pyast
