// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "complint/pyast/token.hpp"

namespace complint::pyast {

/// Tokenizer reproducing the CPython 3.8 tokenizer's token stream and error
/// messages. The input is normalized (BOM stripped, CR/CRLF to LF, trailing
/// newline appended) into an owned buffer that all token views point into.
class Lexer {
 public:
  explicit Lexer(std::string_view source);

  Lexer(const Lexer&) = delete;
  Lexer& operator=(const Lexer&) = delete;

  /// Full token stream. Always ends with EndMarker or a single Error token.
  const std::vector<Token>& tokens() const noexcept { return tokens_; }

  /// Normalized buffer the tokens view into.
  std::string_view buffer() const noexcept { return buf_; }

  /// Text of 1-based line `line` without its newline; empty if out of range.
  std::string_view line_text(int line) const noexcept;

  /// Number of lines in the normalized buffer.
  int line_count() const noexcept { return static_cast<int>(line_starts_.size()) - 1; }

 private:
  void run();

  std::string buf_;
  std::vector<std::size_t> line_starts_;
  std::vector<Token> tokens_;
};

}  // namespace complint::pyast
