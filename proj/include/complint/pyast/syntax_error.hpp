// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "complint/pyast/source_text.hpp"

namespace complint::pyast {

enum class AstErrorCategory : std::uint8_t {
  UnexpectedEof,
  EolStringLiteral,
  InvalidSyntaxAtEof,
  EofTripleQuotedString,
  InvalidSyntax,
  PrintMissingParentheses,
  KeywordArgumentRepeated,
  LeadingZerosDecimal,
  UnmatchedParen,
  CannotAssignToFunctionCall,
  PositionalAfterKeyword,
  ExpressionCannotContainAssignment,
  Other,
};

inline constexpr std::size_t kAstErrorCategoryCount = 13;

/// Stable identifier used in verdict files and reports.
std::string_view category_name(AstErrorCategory c) noexcept;
std::optional<AstErrorCategory> category_from_name(std::string_view name) noexcept;

constexpr bool is_eof_category(AstErrorCategory c) noexcept {
  return c == AstErrorCategory::UnexpectedEof || c == AstErrorCategory::EolStringLiteral ||
         c == AstErrorCategory::InvalidSyntaxAtEof || c == AstErrorCategory::EofTripleQuotedString;
}

struct SyntaxErrorReport {
  AstErrorCategory category = AstErrorCategory::Other;
  bool is_eof = false;
  int line = 1;    // 1-based
  int column = 0;  // 0-based byte offset
  std::string raw_message;

  friend bool operator==(const SyntaxErrorReport&, const SyntaxErrorReport&) = default;
};

/// Maps an interpreter message onto the category set. "invalid syntax" is
/// split by position: at EOF iff (line, column) is at or after the start of
/// the last significant token of `source`.
std::pair<AstErrorCategory, bool> classify_syntax_error(std::string_view raw_message, int line, int column,
                                                        const SourceText& source);

/// Message-only part of the classification; InvalidSyntax is returned for
/// "invalid syntax" without deciding the EOF split.
AstErrorCategory category_for_message(std::string_view raw_message);

}  // namespace complint::pyast
