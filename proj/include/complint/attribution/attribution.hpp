// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "complint/lint/lint.hpp"
#include "complint/pyast/parser.hpp"
#include "complint/pyast/source_text.hpp"
#include "complint/pyast/syntax_error.hpp"

namespace complint::attribution {

struct CompletionSample {
  std::string problem_id;
  std::int64_t sample_index = 0;
  std::string completion;
  /// Free-form metadata, kept as serialized JSON ("" when absent).
  std::string provenance;
};

enum class Outcome : std::uint8_t { ContextUnparsable, AstError, Lint };

std::string_view outcome_name(Outcome o) noexcept;
std::optional<Outcome> outcome_from_name(std::string_view name) noexcept;

struct SampleVerdict {
  std::string problem_id;
  std::int64_t sample_index = 0;
  Outcome outcome = Outcome::ContextUnparsable;
  /// Set iff outcome == AstError.
  std::optional<pyast::SyntaxErrorReport> ast_error;
  /// Lint outcome only.
  std::vector<lint::Diagnostic> attributed;
  std::set<lint::LintCheckKind> context_error_kinds;
  int undefined_variables = 0;
  int undefined_functions = 0;

  friend bool operator==(const SampleVerdict&, const SampleVerdict&) = default;
};

using ErrorType = std::variant<pyast::AstErrorCategory, lint::LintCheckKind>;

/// "ast:UnexpectedEof" / "lint:UndefinedName".
std::string error_type_name(const ErrorType& e);

/// Raised when a completion is not valid UTF-8.
class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Context-side work shared by every sample of a problem.
struct ContextAnalysis {
  SourceText normalized;  // context, newline-terminated unless empty
  bool parsable = false;
  std::vector<lint::Diagnostic> diagnostics;
  int line_count = 0;
};

ContextAnalysis analyze_context(const SourceText& context, const lint::CheckSet& checks = lint::all_checks());

/// Context with a bridging newline appended iff it does not already end
/// with one.
std::string concatenate(std::string_view context, std::string_view completion);

SampleVerdict evaluate_with_context(const ContextAnalysis& ctx, std::string_view completion,
                                    const lint::CheckSet& checks = lint::all_checks());

/// The two-pass pipeline: parse c, parse c+x, lint both, attribute the
/// difference. Ids are left empty. Throws EncodingError on non-UTF-8 input.
SampleVerdict evaluate_sample(const SourceText& context, std::string_view completion,
                              const lint::CheckSet& checks = lint::all_checks());

/// Multiset difference keyed on (kind, symbol, line); keeps full_diags order.
std::vector<lint::Diagnostic> diff_diagnostics(const std::vector<lint::Diagnostic>& context_diags,
                                               const std::vector<lint::Diagnostic>& full_diags,
                                               int context_line_count);

std::set<ErrorType> dedup_error_types(const SampleVerdict& verdict);

}  // namespace complint::attribution
