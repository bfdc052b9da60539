// SPDX-License-Identifier: Apache-2.0
#include "complint/io/report.hpp"

#include <cstdio>

#include <json.hpp>

namespace complint::io {

namespace {

using json = nlohmann::ordered_json;

json rate(const std::optional<double>& r) { return r ? json(metrics::round3(*r)) : json(nullptr); }
json prob(const std::optional<double>& r) { return r ? json(*r) : json(nullptr); }

std::string fixed3(const std::optional<double>& r) {
  if (!r) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", metrics::round3(*r));
  return buf;
}

std::string fixed6(const std::optional<double>& r) {
  if (!r) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *r);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_to_json(const metrics::EvalReport& r, const std::optional<metrics::ConditionalReport>& cond,
                           const RunMetadata& run) {
  json j;
  j["format_version"] = metrics::kReportFormatVersion;
  j["edit_similarity_definition"] = metrics::kEditSimilarityDefinition;
  json meta = json::object();
  for (const auto& [k, v] : run) meta[k] = v;
  j["run"] = std::move(meta);
  j["total_samples"] = r.total_samples;
  j["discarded_context_unparsable"] = r.discarded_context_unparsable;
  j["evaluated_samples"] = r.evaluated_samples;

  json ast;
  ast["total_rate"] = rate(r.ast_total_rate);
  ast["eof_rate"] = rate(r.ast_eof_rate);
  ast["non_eof_rate"] = rate(r.ast_non_eof_rate);
  ast["error_samples"] = r.ast_error_samples;
  ast["eof_samples"] = r.ast_eof_samples;
  json by_cat = json::object();
  for (std::size_t i = 0; i < pyast::kAstErrorCategoryCount; ++i) {
    const auto name = std::string(pyast::category_name(static_cast<pyast::AstErrorCategory>(i)));
    by_cat[name] = {{"count", r.ast_counts[i]}, {"rate", rate(r.ast_rates[i])}};
  }
  ast["by_category"] = std::move(by_cat);
  j["ast"] = std::move(ast);

  json lint_j = json::object();
  for (std::size_t i = 0; i < lint::kLintCheckKindCount; ++i) {
    const auto name = std::string(lint::check_kind_name(static_cast<lint::LintCheckKind>(i)));
    lint_j[name] = {{"count", r.lint_counts[i]}, {"rate", rate(r.lint_rates[i])}};
  }
  j["lint"] = std::move(lint_j);
  j["undefined_names"] = {{"variable", r.undefined_variable_count}, {"function", r.undefined_function_count}};
  j["edit_similarity_mean"] = rate(r.edit_similarity_mean);

  if (cond) {
    json rows = json::array();
    for (const auto& row : cond->rows) {
      json rj;
      rj["kind"] = lint::check_kind_name(row.kind);
      rj["p_x_given_c"] = prob(row.p_x_given_c);
      rj["p_x_given_not_c"] = prob(row.p_x_given_not_c);
      rj["amplification_ratio"] = prob(row.amplification_ratio);
      rj["p_c_given_x"] = prob(row.p_c_given_x);
      rj["counts"] = {{"in_context", row.counts.in_context},
                      {"in_context_and_x", row.counts.in_context_and_x},
                      {"not_in_context", row.counts.not_in_context},
                      {"not_in_context_and_x", row.counts.not_in_context_and_x}};
      rows.push_back(std::move(rj));
    }
    j["conditional"] = std::move(rows);
  }
  return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::string report_to_csv(const metrics::EvalReport& r, const std::optional<metrics::ConditionalReport>& cond,
                          const RunMetadata& run) {
  std::string run_str;
  for (const auto& [k, v] : run) {
    if (!run_str.empty()) run_str += ";";
    run_str += k + "=" + v;
  }
  const std::string prefix = std::to_string(metrics::kReportFormatVersion) + "," +
                             std::string(metrics::kEditSimilarityDefinition) + "," + csv_field(run_str) + "," +
                             std::to_string(r.total_samples) + "," + std::to_string(r.evaluated_samples) + ",";
  std::string out =
      "format_version,edit_similarity_definition,run,total_samples,evaluated_samples,error_type,count,rate,"
      "p_x_given_c,p_x_given_not_c,amplification_ratio,p_c_given_x\n";
  auto row = [&](const std::string& type, std::int64_t count, const std::optional<double>& rate,
                 const metrics::ConditionalRow* c) {
    out += prefix + type + "," + std::to_string(count) + "," + fixed3(rate) + ",";
    if (c != nullptr) {
      out += fixed6(c->p_x_given_c) + "," + fixed6(c->p_x_given_not_c) + "," + fixed6(c->amplification_ratio) + "," +
             fixed6(c->p_c_given_x);
    } else {
      out += ",,,";
    }
    out += "\n";
  };
  row("ast:total", r.ast_error_samples, r.ast_total_rate, nullptr);
  row("ast:eof", r.ast_eof_samples, r.ast_eof_rate, nullptr);
  row("ast:non_eof", r.ast_error_samples - r.ast_eof_samples, r.ast_non_eof_rate, nullptr);
  for (std::size_t i = 0; i < pyast::kAstErrorCategoryCount; ++i) {
    row("ast:" + std::string(pyast::category_name(static_cast<pyast::AstErrorCategory>(i))), r.ast_counts[i],
        r.ast_rates[i], nullptr);
  }
  for (std::size_t i = 0; i < lint::kLintCheckKindCount; ++i) {
    const auto kind = static_cast<lint::LintCheckKind>(i);
    const metrics::ConditionalRow* c = nullptr;
    if (cond) {
      for (const auto& cr : cond->rows) {
        if (cr.kind == kind) c = &cr;
      }
    }
    row("lint:" + std::string(lint::check_kind_name(kind)), r.lint_counts[i], r.lint_rates[i], c);
  }
  return out;
}

}  // namespace complint::io
