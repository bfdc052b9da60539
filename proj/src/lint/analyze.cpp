// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <tuple>

#include <spdlog/spdlog.h>

#include "checker.hpp"
#include "complint/lint/lint.hpp"

namespace complint::lint {

namespace {

constexpr std::array<std::string_view, kLintCheckKindCount> kCheckNames = {
    "UndefinedName",        "UnusedVariable", "FStringMissingPlaceholders",
    "UnusedImport",         "RedefinedWhileUnused", "UndefinedLocal",
};

std::string quoted(const std::string& s) { return "'" + s + "'"; }

std::string message_for(const detail::Message& m) {
  switch (m.kind) {
    case LintCheckKind::UndefinedName:
      return "undefined name " + quoted(m.name);
    case LintCheckKind::UnusedVariable:
      return "local variable " + quoted(m.name) + " is assigned to but never used";
    case LintCheckKind::FStringMissingPlaceholders:
      return "f-string is missing placeholders";
    case LintCheckKind::UnusedImport:
      return quoted(m.import_repr) + " imported but unused";
    case LintCheckKind::RedefinedWhileUnused:
      return "redefinition of unused " + quoted(m.name) + " from line " + std::to_string(m.related_line.value_or(0));
    case LintCheckKind::UndefinedLocal:
      if (m.related_builtin) {
        return "local variable " + quoted(m.name) + " defined as a builtin referenced before assignment";
      }
      return "local variable " + quoted(m.name) + " defined in enclosing scope on line " +
             std::to_string(m.related_line.value_or(0)) + " referenced before assignment";
  }
  return {};
}

}  // namespace

std::string_view check_kind_name(LintCheckKind kind) noexcept {
  return kCheckNames[static_cast<std::size_t>(kind)];
}

std::optional<LintCheckKind> check_kind_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kCheckNames.size(); ++i) {
    if (kCheckNames[i] == name) return static_cast<LintCheckKind>(i);
  }
  return std::nullopt;
}

std::string_view name_kind_name(NameKind kind) noexcept {
  return kind == NameKind::Function ? "function" : "variable";
}

std::string_view scope_kind_name(ScopeKind kind) noexcept {
  switch (kind) {
    case ScopeKind::Module: return "module";
    case ScopeKind::Function: return "function";
    case ScopeKind::Lambda: return "lambda";
    case ScopeKind::Class: return "class";
    case ScopeKind::Comprehension: return "comprehension";
  }
  return "?";
}

std::string_view binding_kind_name(BindingKind kind) noexcept {
  static constexpr std::array<std::string_view, 14> kNames = {
      "Assignment", "AugmentedAssignment", "FunctionDef", "ClassDef",     "Parameter",
      "Import",     "ImportFrom",          "StarImport",  "ForTarget",    "WithTarget",
      "ExceptHandler", "GlobalDecl",       "NonlocalDecl", "ComprehensionTarget",
  };
  return kNames[static_cast<std::size_t>(kind)];
}

const CheckSet& all_checks() {
  static const CheckSet all = {
      LintCheckKind::UndefinedName,        LintCheckKind::UnusedVariable, LintCheckKind::FStringMissingPlaceholders,
      LintCheckKind::UnusedImport,         LintCheckKind::RedefinedWhileUnused, LintCheckKind::UndefinedLocal,
  };
  return all;
}

ScopeTree build_scopes(const pyast::Ast& ast) {
  detail::Checker checker(ast);
  checker.run();
  return checker.scope_tree();
}

std::vector<Diagnostic> analyze(const pyast::Ast& ast, const SourceText& source, const CheckSet& checks) {
  std::vector<Diagnostic> out;
  if (checks.empty() || ast.root() == pyast::kNoNode) return out;
  detail::Checker checker(ast);
  checker.run();
  const int max_line = static_cast<int>(source.line_count());
  for (const auto& m : checker.messages()) {
    if (checks.count(m.kind) == 0) continue;
    Diagnostic d;
    d.kind = m.kind;
    d.symbol = m.name;
    d.line = std::clamp(m.line, 1, std::max(1, max_line));
    d.column = std::max(0, m.col);
    d.message = message_for(m);
    d.related_line = m.related_line;
    out.push_back(std::move(d));
  }
  std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.line, a.column, a.kind) < std::tie(b.line, b.column, b.kind);
  });
  return out;
}

NameKind classify_undefined_kind(const Diagnostic& diag, const pyast::Ast& ast) {
  using pyast::NodeKind;
  for (pyast::NodeId id = 0; id < ast.size(); ++id) {
    const auto& n = ast.node(id);
    if (n.kind != NodeKind::Name || n.ident != diag.symbol || n.lineno != diag.line || n.col_offset != diag.column) {
      continue;
    }
    if (n.parent != pyast::kNoNode && ast.kind(n.parent) == NodeKind::Call &&
        ast.child(n.parent, pyast::field::kCallFunc) == id) {
      return NameKind::Function;
    }
    return NameKind::Variable;
  }
  spdlog::warn("no name node for undefined '{}' at {}:{}; treating as variable", diag.symbol, diag.line, diag.column);
  return NameKind::Variable;
}

}  // namespace complint::lint
