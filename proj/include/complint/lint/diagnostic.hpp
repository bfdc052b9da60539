// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace complint::lint {

enum class LintCheckKind : std::uint8_t {
  UndefinedName,
  UnusedVariable,
  FStringMissingPlaceholders,
  UnusedImport,
  RedefinedWhileUnused,
  UndefinedLocal,
};

inline constexpr std::size_t kLintCheckKindCount = 6;

/// Stable identifier ("UndefinedName", ...) used in verdicts and reports.
std::string_view check_kind_name(LintCheckKind kind) noexcept;
std::optional<LintCheckKind> check_kind_from_name(std::string_view name) noexcept;

struct Diagnostic {
  LintCheckKind kind = LintCheckKind::UndefinedName;
  /// Offending name; empty for FStringMissingPlaceholders.
  std::string symbol;
  int line = 1;    // 1-based
  int column = 0;  // 0-based
  std::string message;
  /// Line of the earlier definition for RedefinedWhileUnused/UndefinedLocal.
  std::optional<int> related_line;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Whether an undefined name is called (`foo(...)`) or used otherwise.
enum class NameKind : std::uint8_t { Variable, Function };

std::string_view name_kind_name(NameKind kind) noexcept;

}  // namespace complint::lint
