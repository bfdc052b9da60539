// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "complint/attribution/attribution.hpp"
#include "complint/lint/diagnostic.hpp"
#include "complint/pyast/syntax_error.hpp"

namespace complint::metrics {

inline constexpr std::string_view kEditSimilarityDefinition = "char-levenshtein-v1";
inline constexpr int kReportFormatVersion = 1;

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-kind counts behind the conditional statistics.
struct ConditionalCounts {
  std::int64_t in_context = 0;               // e in c
  std::int64_t in_context_and_x = 0;         // e in c and e in x
  std::int64_t not_in_context = 0;           // e not in c
  std::int64_t not_in_context_and_x = 0;     // e not in c and e in x

  friend bool operator==(const ConditionalCounts&, const ConditionalCounts&) = default;
};

/// Mergeable partial aggregate. Holds only integer counts and the set of
/// seen sample keys, so merging is exact.
struct Aggregate {
  std::int64_t total_samples = 0;
  std::int64_t discarded_context_unparsable = 0;
  std::int64_t lint_samples = 0;
  std::int64_t ast_error_samples = 0;
  std::int64_t ast_eof_samples = 0;
  std::array<std::int64_t, pyast::kAstErrorCategoryCount> ast_counts{};
  std::array<std::int64_t, lint::kLintCheckKindCount> lint_counts{};
  std::int64_t undefined_variable_count = 0;
  std::int64_t undefined_function_count = 0;
  std::array<ConditionalCounts, lint::kLintCheckKindCount> conditional{};
  std::set<std::pair<std::string, std::int64_t>> keys;

  /// Throws MetricsError on a duplicate (problem_id, sample) key.
  void add(const attribution::SampleVerdict& v);

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

/// Throws MetricsError when the two aggregates share a sample key.
Aggregate merge(const Aggregate& a, const Aggregate& b);

struct EvalReport {
  std::int64_t total_samples = 0;
  std::int64_t discarded_context_unparsable = 0;
  std::int64_t evaluated_samples = 0;  // denominator
  std::optional<double> ast_total_rate;
  std::optional<double> ast_eof_rate;
  std::optional<double> ast_non_eof_rate;
  std::array<std::optional<double>, pyast::kAstErrorCategoryCount> ast_rates{};
  std::array<std::optional<double>, lint::kLintCheckKindCount> lint_rates{};
  std::int64_t ast_error_samples = 0;
  std::int64_t ast_eof_samples = 0;
  std::array<std::int64_t, pyast::kAstErrorCategoryCount> ast_counts{};
  std::array<std::int64_t, lint::kLintCheckKindCount> lint_counts{};
  std::int64_t undefined_variable_count = 0;
  std::int64_t undefined_function_count = 0;
  std::optional<double> edit_similarity_mean;
};

struct ConditionalRow {
  lint::LintCheckKind kind = lint::LintCheckKind::UndefinedName;
  ConditionalCounts counts;
  std::optional<double> p_x_given_c;
  std::optional<double> p_x_given_not_c;
  std::optional<double> amplification_ratio;
  std::optional<double> p_c_given_x;
};

struct ConditionalReport {
  std::vector<ConditionalRow> rows;
};

Aggregate aggregate_partial(const std::vector<attribution::SampleVerdict>& verdicts);

/// Throws MetricsError on an empty stream or duplicate keys.
EvalReport aggregate(const std::vector<attribution::SampleVerdict>& verdicts);
EvalReport finalize(const Aggregate& agg);

ConditionalReport conditional_stats(const std::vector<attribution::SampleVerdict>& verdicts,
                                     bool include_unused_import = false);
ConditionalReport conditional_from(const Aggregate& agg, bool include_unused_import = false);

/// Edit distance over Unicode code points (invalid UTF-8 bytes count as one
/// character each), unit costs.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// 100 * (1 - d / max(|a|, |b|)); 100 when both are empty.
double edit_similarity(std::string_view generation, std::string_view groundtruth);

/// Rounds to 3 decimals, as reported.
double round3(double x) noexcept;

}  // namespace complint::metrics
