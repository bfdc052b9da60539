// SPDX-License-Identifier: Apache-2.0
#include "complint/attribution/attribution.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace complint::attribution {

namespace {

using Key = std::tuple<lint::LintCheckKind, std::string, int>;

Key key_of(const lint::Diagnostic& d) { return {d.kind, d.symbol, d.line}; }

}  // namespace

std::string_view outcome_name(Outcome o) noexcept {
  switch (o) {
    case Outcome::ContextUnparsable: return "context_unparsable";
    case Outcome::AstError: return "ast_error";
    case Outcome::Lint: return "lint";
  }
  return "?";
}

std::optional<Outcome> outcome_from_name(std::string_view name) noexcept {
  for (Outcome o : {Outcome::ContextUnparsable, Outcome::AstError, Outcome::Lint}) {
    if (outcome_name(o) == name) return o;
  }
  return std::nullopt;
}

std::string error_type_name(const ErrorType& e) {
  if (const auto* a = std::get_if<pyast::AstErrorCategory>(&e)) {
    return "ast:" + std::string(pyast::category_name(*a));
  }
  return "lint:" + std::string(lint::check_kind_name(std::get<lint::LintCheckKind>(e)));
}

std::string concatenate(std::string_view context, std::string_view completion) {
  std::string out;
  out.reserve(context.size() + completion.size() + 1);
  out.append(context);
  if (!context.empty() && context.back() != '\n') out.push_back('\n');
  out.append(completion);
  return out;
}

ContextAnalysis analyze_context(const SourceText& context, const lint::CheckSet& checks) {
  ContextAnalysis out;
  std::string text = context.text();
  if (!text.empty() && text.back() != '\n') text.push_back('\n');
  out.normalized = SourceText(std::move(text));
  out.line_count = static_cast<int>(std::count(out.normalized.text().begin(), out.normalized.text().end(), '\n'));
  const auto parsed = pyast::parse_module(context);
  out.parsable = parsed.ok();
  if (out.parsable) out.diagnostics = lint::analyze(parsed.ast(), context, checks);
  return out;
}

SampleVerdict evaluate_with_context(const ContextAnalysis& ctx, std::string_view completion,
                                    const lint::CheckSet& checks) {
  if (!is_valid_utf8(completion)) throw EncodingError("completion is not valid UTF-8");
  SampleVerdict v;
  if (!ctx.parsable) {
    v.outcome = Outcome::ContextUnparsable;
    return v;
  }
  const SourceText full(concatenate(ctx.normalized.text(), completion));
  const auto parsed = pyast::parse_module(full);
  if (!parsed.ok()) {
    v.outcome = Outcome::AstError;
    v.ast_error = parsed.error();
    return v;
  }
  v.outcome = Outcome::Lint;
  const auto full_diags = lint::analyze(parsed.ast(), full, checks);
  v.attributed = diff_diagnostics(ctx.diagnostics, full_diags, ctx.line_count);
  for (const auto& d : ctx.diagnostics) v.context_error_kinds.insert(d.kind);
  for (const auto& d : v.attributed) {
    if (d.kind != lint::LintCheckKind::UndefinedName) continue;
    if (lint::classify_undefined_kind(d, parsed.ast()) == lint::NameKind::Function) {
      ++v.undefined_functions;
    } else {
      ++v.undefined_variables;
    }
  }
  return v;
}

SampleVerdict evaluate_sample(const SourceText& context, std::string_view completion, const lint::CheckSet& checks) {
  return evaluate_with_context(analyze_context(context, checks), completion, checks);
}

std::vector<lint::Diagnostic> diff_diagnostics(const std::vector<lint::Diagnostic>& context_diags,
                                               const std::vector<lint::Diagnostic>& full_diags,
                                               int /*context_line_count*/) {
  if (context_diags.empty()) return full_diags;
  std::map<Key, int> pending;
  for (const auto& d : context_diags) ++pending[key_of(d)];
  std::vector<lint::Diagnostic> out;
  for (const auto& d : full_diags) {
    auto it = pending.find(key_of(d));
    if (it != pending.end() && it->second > 0) {
      --it->second;
      continue;
    }
    out.push_back(d);
  }
  return out;
}

std::set<ErrorType> dedup_error_types(const SampleVerdict& verdict) {
  std::set<ErrorType> out;
  switch (verdict.outcome) {
    case Outcome::ContextUnparsable:
      break;
    case Outcome::AstError:
      if (verdict.ast_error) out.insert(verdict.ast_error->category);
      break;
    case Outcome::Lint:
      for (const auto& d : verdict.attributed) out.insert(d.kind);
      break;
  }
  return out;
}

}  // namespace complint::attribution
