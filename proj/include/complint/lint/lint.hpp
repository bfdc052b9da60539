// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "complint/lint/diagnostic.hpp"
#include "complint/lint/scope.hpp"
#include "complint/pyast/ast.hpp"
#include "complint/pyast/source_text.hpp"

namespace complint::lint {

using CheckSet = std::set<LintCheckKind>;

/// All six checks.
const CheckSet& all_checks();

/// Runs the selected checks. Output is sorted by (line, column, kind).
std::vector<Diagnostic> analyze(const pyast::Ast& ast, const SourceText& source, const CheckSet& checks);

/// Function iff the UndefinedName diagnostic points at the callee of a call
/// (`foo(...)`, not `foo.bar()`). Falls back to Variable with a warning when
/// no matching Name node exists.
NameKind classify_undefined_kind(const Diagnostic& diag, const pyast::Ast& ast);

/// Module-level builtins visible to every program, sorted.
std::span<const std::string_view> builtin_names() noexcept;
bool is_builtin(std::string_view name) noexcept;

}  // namespace complint::lint
