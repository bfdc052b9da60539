// SPDX-License-Identifier: Apache-2.0
#include "complint/pyast/syntax_error.hpp"

#include <array>
#include <cctype>
#include <string>

#include "complint/pyast/lexer.hpp"

namespace complint::pyast {

namespace {

constexpr std::array<std::string_view, kAstErrorCategoryCount> kNames = {
    "UnexpectedEof",
    "EolStringLiteral",
    "InvalidSyntaxAtEof",
    "EofTripleQuotedString",
    "InvalidSyntax",
    "PrintMissingParentheses",
    "KeywordArgumentRepeated",
    "LeadingZerosDecimal",
    "UnmatchedParen",
    "CannotAssignToFunctionCall",
    "PositionalAfterKeyword",
    "ExpressionCannotContainAssignment",
    "Other",
};

struct MessageRule {
  std::string_view needle;
  AstErrorCategory category;
};

constexpr MessageRule kRules[] = {
#define COMPLINT_MESSAGE(needle, cat) {needle, AstErrorCategory::cat},
#include "syntax_message_table.inc"
#undef COMPLINT_MESSAGE
};

std::string normalize(std::string_view msg) {
  std::string out;
  out.reserve(msg.size());
  bool space = false;
  for (char ch : msg) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) {
      out.push_back(' ');
      space = false;
    }
    out.push_back(ch == '"' ? '\'' : static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

std::string_view category_name(AstErrorCategory c) noexcept { return kNames[static_cast<std::size_t>(c)]; }

std::optional<AstErrorCategory> category_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<AstErrorCategory>(i);
  return std::nullopt;
}

AstErrorCategory category_for_message(std::string_view raw_message) {
  const std::string norm = normalize(raw_message);
  for (const auto& rule : kRules)
    if (norm.find(rule.needle) != std::string::npos) return rule.category;
  return AstErrorCategory::Other;
}

std::pair<AstErrorCategory, bool> classify_syntax_error(std::string_view raw_message, int line, int column,
                                                        const SourceText& source) {
  AstErrorCategory cat = category_for_message(raw_message);
  if (cat == AstErrorCategory::InvalidSyntax) {
    const Lexer lexer(source.view());
    int last_line = 0, last_col = 0;
    for (const Token& t : lexer.tokens()) {
      switch (t.kind) {
        case TokenKind::Name:
        case TokenKind::Number:
        case TokenKind::String:
        case TokenKind::Op:
          last_line = t.line;
          last_col = t.col;
          break;
        default:
          break;
      }
    }
    const bool at_eof = line > last_line || (line == last_line && column >= last_col);
    if (at_eof) cat = AstErrorCategory::InvalidSyntaxAtEof;
  }
  return {cat, is_eof_category(cat)};
}

}  // namespace complint::pyast
