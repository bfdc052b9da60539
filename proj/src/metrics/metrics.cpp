// SPDX-License-Identifier: Apache-2.0
#include "complint/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace complint::metrics {

namespace {

std::optional<double> percent(std::int64_t num, std::int64_t den) {
  if (den <= 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den <= 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len > 1 && i + len <= s.size() && is_valid_utf8(s.substr(i, len))) {
      char32_t cp = len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
      for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

std::size_t distance(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
  std::size_t start = 0;
  std::size_t ea = a.size();
  std::size_t eb = b.size();
  while (start < ea && start < eb && a[start] == b[start]) ++start;
  while (ea > start && eb > start && a[ea - 1] == b[eb - 1]) {
    --ea;
    --eb;
  }
  const std::size_t n = ea - start;
  const std::size_t m = eb - start;
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> prev(m + 1);
  std::vector<std::size_t> cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    const char32_t ca = a[start + i - 1];
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (ca == b[start + j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

void Aggregate::add(const attribution::SampleVerdict& v) {
  if (!keys.emplace(v.problem_id, v.sample_index).second) {
    throw MetricsError("duplicate sample (" + v.problem_id + ", " + std::to_string(v.sample_index) +
                       "): verdicts from mixed runs");
  }
  ++total_samples;
  switch (v.outcome) {
    case attribution::Outcome::ContextUnparsable:
      ++discarded_context_unparsable;
      return;
    case attribution::Outcome::AstError:
      ++ast_error_samples;
      if (v.ast_error) {
        if (v.ast_error->is_eof) ++ast_eof_samples;
        ++ast_counts[static_cast<std::size_t>(v.ast_error->category)];
      }
      return;
    case attribution::Outcome::Lint:
      break;
  }
  ++lint_samples;
  std::array<bool, lint::kLintCheckKindCount> in_x{};
  for (const auto& d : v.attributed) in_x[static_cast<std::size_t>(d.kind)] = true;
  for (std::size_t k = 0; k < lint::kLintCheckKindCount; ++k) {
    if (in_x[k]) ++lint_counts[k];
    const bool in_c = v.context_error_kinds.count(static_cast<lint::LintCheckKind>(k)) != 0;
    auto& c = conditional[k];
    if (in_c) {
      ++c.in_context;
      if (in_x[k]) ++c.in_context_and_x;
    } else {
      ++c.not_in_context;
      if (in_x[k]) ++c.not_in_context_and_x;
    }
  }
  undefined_variable_count += v.undefined_variables;
  undefined_function_count += v.undefined_functions;
}

Aggregate merge(const Aggregate& a, const Aggregate& b) {
  Aggregate out = a;
  for (const auto& k : b.keys) {
    if (!out.keys.insert(k).second) {
      throw MetricsError("duplicate sample (" + k.first + ", " + std::to_string(k.second) +
                         ") across partial aggregates");
    }
  }
  out.total_samples += b.total_samples;
  out.discarded_context_unparsable += b.discarded_context_unparsable;
  out.lint_samples += b.lint_samples;
  out.ast_error_samples += b.ast_error_samples;
  out.ast_eof_samples += b.ast_eof_samples;
  for (std::size_t i = 0; i < out.ast_counts.size(); ++i) out.ast_counts[i] += b.ast_counts[i];
  for (std::size_t i = 0; i < out.lint_counts.size(); ++i) out.lint_counts[i] += b.lint_counts[i];
  out.undefined_variable_count += b.undefined_variable_count;
  out.undefined_function_count += b.undefined_function_count;
  for (std::size_t i = 0; i < out.conditional.size(); ++i) {
    out.conditional[i].in_context += b.conditional[i].in_context;
    out.conditional[i].in_context_and_x += b.conditional[i].in_context_and_x;
    out.conditional[i].not_in_context += b.conditional[i].not_in_context;
    out.conditional[i].not_in_context_and_x += b.conditional[i].not_in_context_and_x;
  }
  return out;
}

Aggregate aggregate_partial(const std::vector<attribution::SampleVerdict>& verdicts) {
  Aggregate agg;
  for (const auto& v : verdicts) agg.add(v);
  return agg;
}

EvalReport finalize(const Aggregate& agg) {
  if (agg.total_samples == 0) throw MetricsError("no samples");
  EvalReport r;
  r.total_samples = agg.total_samples;
  r.discarded_context_unparsable = agg.discarded_context_unparsable;
  r.evaluated_samples = agg.total_samples - agg.discarded_context_unparsable;
  const auto den = r.evaluated_samples;
  r.ast_error_samples = agg.ast_error_samples;
  r.ast_eof_samples = agg.ast_eof_samples;
  r.ast_total_rate = percent(agg.ast_error_samples, den);
  r.ast_eof_rate = percent(agg.ast_eof_samples, den);
  r.ast_non_eof_rate = percent(agg.ast_error_samples - agg.ast_eof_samples, den);
  r.ast_counts = agg.ast_counts;
  r.lint_counts = agg.lint_counts;
  for (std::size_t i = 0; i < agg.ast_counts.size(); ++i) r.ast_rates[i] = percent(agg.ast_counts[i], den);
  for (std::size_t i = 0; i < agg.lint_counts.size(); ++i) r.lint_rates[i] = percent(agg.lint_counts[i], den);
  r.undefined_variable_count = agg.undefined_variable_count;
  r.undefined_function_count = agg.undefined_function_count;
  return r;
}

EvalReport aggregate(const std::vector<attribution::SampleVerdict>& verdicts) {
  return finalize(aggregate_partial(verdicts));
}

ConditionalReport conditional_from(const Aggregate& agg, bool include_unused_import) {
  ConditionalReport report;
  for (std::size_t k = 0; k < lint::kLintCheckKindCount; ++k) {
    const auto kind = static_cast<lint::LintCheckKind>(k);
    if (kind == lint::LintCheckKind::UnusedImport && !include_unused_import) continue;
    ConditionalRow row;
    row.kind = kind;
    row.counts = agg.conditional[k];
    const auto& c = row.counts;
    row.p_x_given_c = ratio(c.in_context_and_x, c.in_context);
    row.p_x_given_not_c = ratio(c.not_in_context_and_x, c.not_in_context);
    if (row.p_x_given_c && row.p_x_given_not_c && *row.p_x_given_not_c > 0.0) {
      // Ratio of counts, computed in one division to keep it exact where possible.
      row.amplification_ratio = static_cast<double>(c.in_context_and_x * c.not_in_context) /
                                static_cast<double>(c.in_context * c.not_in_context_and_x);
    }
    row.p_c_given_x = ratio(c.in_context_and_x, c.in_context_and_x + c.not_in_context_and_x);
    report.rows.push_back(row);
  }
  return report;
}

ConditionalReport conditional_stats(const std::vector<attribution::SampleVerdict>& verdicts,
                                    bool include_unused_import) {
  return conditional_from(aggregate_partial(verdicts), include_unused_import);
}

std::size_t levenshtein(std::string_view a, std::string_view b) { return distance(decode(a), decode(b)); }

double edit_similarity(std::string_view generation, std::string_view groundtruth) {
  const auto a = decode(generation);
  const auto b = decode(groundtruth);
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 100.0;
  return 100.0 * (1.0 - static_cast<double>(distance(a, b)) / static_cast<double>(longest));
}

double round3(double x) noexcept { return std::round(x * 1000.0) / 1000.0; }

}  // namespace complint::metrics
