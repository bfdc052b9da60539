// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <variant>

#include "complint/pyast/ast.hpp"
#include "complint/pyast/source_text.hpp"
#include "complint/pyast/syntax_error.hpp"

namespace complint::pyast {

/// Either a tree or a categorized syntax error, never both.
class ParseResult {
 public:
  explicit ParseResult(Ast ast) : v_(std::move(ast)) {}
  explicit ParseResult(SyntaxErrorReport err) : v_(std::move(err)) {}

  bool ok() const noexcept { return v_.index() == 0; }
  const Ast& ast() const { return std::get<Ast>(v_); }
  Ast& ast() { return std::get<Ast>(v_); }
  const SyntaxErrorReport& error() const { return std::get<SyntaxErrorReport>(v_); }

 private:
  std::variant<Ast, SyntaxErrorReport> v_;
};

/// Parses a module with Python 3.8 grammar and `ast.parse` error semantics.
ParseResult parse_module(const SourceText& source);

}  // namespace complint::pyast
