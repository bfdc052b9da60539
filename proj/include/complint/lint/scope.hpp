// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "complint/pyast/ast.hpp"

namespace complint::lint {

enum class ScopeKind : std::uint8_t { Module, Function, Lambda, Class, Comprehension };

enum class BindingKind : std::uint8_t {
  Assignment,
  AugmentedAssignment,
  FunctionDef,
  ClassDef,
  Parameter,
  Import,
  ImportFrom,
  StarImport,
  ForTarget,
  WithTarget,
  ExceptHandler,
  GlobalDecl,
  NonlocalDecl,
  ComprehensionTarget,
};

std::string_view scope_kind_name(ScopeKind kind) noexcept;
std::string_view binding_kind_name(BindingKind kind) noexcept;

struct Binding {
  std::string name;
  BindingKind kind = BindingKind::Assignment;
  int def_line = 1;
  bool used = false;
};

struct Scope {
  ScopeKind kind = ScopeKind::Module;
  int parent = -1;  // index into ScopeTree::scopes; -1 for the module
  int line = 1;     // line of the node that opened the scope
  /// Bindings alive when the scope closed, in insertion order. Builtins are
  /// not listed.
  std::vector<Binding> bindings;
};

/// Scopes in creation order; scopes[0] is the module.
struct ScopeTree {
  std::vector<Scope> scopes;
};

/// Runs name resolution over a parsed module.
ScopeTree build_scopes(const pyast::Ast& ast);

}  // namespace complint::lint
