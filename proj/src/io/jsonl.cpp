// SPDX-License-Identifier: Apache-2.0
#include "complint/io/jsonl.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

namespace complint::io {

namespace {

using json = nlohmann::ordered_json;

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

/// Calls fn(record, line_no) for each non-blank line.
template <typename F>
void for_each_record(std::istream& in, F&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(line, line_no);
  }
}

json parse_line(const std::string& line, std::size_t line_no) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw DataError("malformed JSON", line_no);
  if (!j.is_object()) throw DataError("expected a JSON object", line_no);
  return j;
}

template <typename T>
T field(const json& j, const char* name, std::size_t line_no) {
  const auto it = j.find(name);
  if (it == j.end()) throw DataError(std::string("missing field '") + name + "'", line_no);
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("field '") + name + "' has the wrong type", line_no);
  }
}

bool is_header(const json& j) { return j.contains("format_version") && !j.contains("problem_id") && !j.contains("id"); }

void check_version(const json& j, std::size_t line_no) {
  const int v = field<int>(j, "format_version", line_no);
  if (v != kFormatVersion) throw DataError("unsupported format_version " + std::to_string(v), line_no);
}

}  // namespace

void write_problems(std::ostream& out, const ProblemsHeader& header, const std::vector<dataset::Problem>& problems) {
  json h;
  h["format_version"] = header.format_version;
  h["token_counter"] = header.token_counter;
  h["seed"] = header.seed;
  out << dump(h) << '\n';
  for (const auto& p : problems) {
    json j;
    j["id"] = p.id;
    j["path"] = p.path;
    j["context"] = p.context;
    j["groundtruth"] = p.groundtruth;
    j["context_tokens"] = p.context_tokens;
    j["groundtruth_tokens"] = p.groundtruth_tokens;
    out << dump(j) << '\n';
  }
}

ProblemsFile read_problems(std::istream& in) {
  ProblemsFile file;
  for_each_record(in, [&](const std::string& line, std::size_t n) {
    const json j = parse_line(line, n);
    if (is_header(j)) {
      check_version(j, n);
      ProblemsHeader h;
      h.token_counter = j.value("token_counter", std::string());
      h.seed = j.value("seed", std::uint64_t{0});
      file.header = h;
      return;
    }
    dataset::Problem p;
    p.id = field<std::string>(j, "id", n);
    p.path = j.value("path", std::string());
    p.context = field<std::string>(j, "context", n);
    p.groundtruth = j.value("groundtruth", std::string());
    p.context_tokens = j.value("context_tokens", 0);
    p.groundtruth_tokens = j.value("groundtruth_tokens", 0);
    file.problems.push_back(std::move(p));
  });
  return file;
}

CompletionsFile read_completions(std::istream& in) {
  CompletionsFile file;
  for_each_record(in, [&](const std::string& line, std::size_t n) {
    if (!is_valid_utf8(line)) {
      ++file.invalid_utf8;
      return;
    }
    const json j = parse_line(line, n);
    if (is_header(j)) {
      check_version(j, n);
      return;
    }
    attribution::CompletionSample s;
    s.problem_id = field<std::string>(j, "problem_id", n);
    // Verdict files say "sample"; completion producers often write "sample_index".
    s.sample_index = field<std::int64_t>(j, j.contains("sample_index") ? "sample_index" : "sample", n);
    if (s.sample_index < 0) throw DataError("negative sample index", n);
    s.completion = field<std::string>(j, "completion", n);
    if (const auto it = j.find("provenance"); it != j.end()) s.provenance = dump(*it);
    file.samples.push_back(std::move(s));
  });
  return file;
}

void write_completions(std::ostream& out, const std::vector<attribution::CompletionSample>& samples) {
  for (const auto& s : samples) {
    json j;
    j["problem_id"] = s.problem_id;
    j["sample"] = s.sample_index;
    j["completion"] = s.completion;
    if (!s.provenance.empty()) j["provenance"] = json::parse(s.provenance, nullptr, false);
    out << dump(j) << '\n';
  }
}

std::string verdict_to_json(const attribution::SampleVerdict& v) {
  json j;
  j["problem_id"] = v.problem_id;
  j["sample"] = v.sample_index;
  j["outcome"] = attribution::outcome_name(v.outcome);
  if (v.ast_error) {
    j["ast_category"] = pyast::category_name(v.ast_error->category);
    j["ast_is_eof"] = v.ast_error->is_eof;
    j["ast_line"] = v.ast_error->line;
    j["ast_col"] = v.ast_error->column;
    j["ast_message"] = v.ast_error->raw_message;
  }
  json diags = json::array();
  for (const auto& d : v.attributed) {
    json dj;
    dj["kind"] = lint::check_kind_name(d.kind);
    dj["symbol"] = d.symbol;
    dj["line"] = d.line;
    dj["col"] = d.column;
    dj["message"] = d.message;
    if (d.related_line) dj["related_line"] = *d.related_line;
    diags.push_back(std::move(dj));
  }
  j["diagnostics"] = std::move(diags);
  json kinds = json::array();
  for (auto k : v.context_error_kinds) kinds.push_back(lint::check_kind_name(k));
  j["context_error_kinds"] = std::move(kinds);
  if (v.outcome == attribution::Outcome::Lint) {
    j["undefined_kinds"] = {{"variable", v.undefined_variables}, {"function", v.undefined_functions}};
  }
  return dump(j);
}

attribution::SampleVerdict verdict_from_json(const std::string& line, std::size_t n) {
  const json j = parse_line(line, n);
  attribution::SampleVerdict v;
  v.problem_id = field<std::string>(j, "problem_id", n);
  v.sample_index = field<std::int64_t>(j, "sample", n);
  const auto outcome = attribution::outcome_from_name(field<std::string>(j, "outcome", n));
  if (!outcome) throw DataError("unknown outcome", n);
  v.outcome = *outcome;
  if (v.outcome == attribution::Outcome::AstError) {
    pyast::SyntaxErrorReport e;
    const auto cat = pyast::category_from_name(field<std::string>(j, "ast_category", n));
    if (!cat) throw DataError("unknown ast_category", n);
    e.category = *cat;
    e.is_eof = j.value("ast_is_eof", pyast::is_eof_category(*cat));
    e.line = j.value("ast_line", 1);
    e.column = j.value("ast_col", 0);
    e.raw_message = j.value("ast_message", std::string());
    v.ast_error = e;
  }
  if (const auto it = j.find("diagnostics"); it != j.end()) {
    if (!it->is_array()) throw DataError("field 'diagnostics' has the wrong type", n);
    for (const auto& dj : *it) {
      lint::Diagnostic d;
      const auto kind = lint::check_kind_from_name(field<std::string>(dj, "kind", n));
      if (!kind) throw DataError("unknown diagnostic kind", n);
      d.kind = *kind;
      d.symbol = dj.value("symbol", std::string());
      d.line = field<int>(dj, "line", n);
      d.column = dj.value("col", 0);
      d.message = dj.value("message", std::string());
      if (dj.contains("related_line")) d.related_line = field<int>(dj, "related_line", n);
      v.attributed.push_back(std::move(d));
    }
  }
  if (const auto it = j.find("context_error_kinds"); it != j.end()) {
    if (!it->is_array()) throw DataError("field 'context_error_kinds' has the wrong type", n);
    for (const auto& kj : *it) {
      const auto kind = kj.is_string() ? lint::check_kind_from_name(kj.get<std::string>()) : std::nullopt;
      if (!kind) throw DataError("unknown context error kind", n);
      v.context_error_kinds.insert(*kind);
    }
  }
  if (const auto it = j.find("undefined_kinds"); it != j.end()) {
    v.undefined_variables = it->value("variable", 0);
    v.undefined_functions = it->value("function", 0);
  }
  return v;
}

void write_verdicts(std::ostream& out, const std::vector<attribution::SampleVerdict>& verdicts) {
  json h;
  h["format_version"] = kFormatVersion;
  h["kind"] = "verdicts";
  out << dump(h) << '\n';
  for (const auto& v : verdicts) out << verdict_to_json(v) << '\n';
}

std::vector<attribution::SampleVerdict> read_verdicts(std::istream& in) {
  std::vector<attribution::SampleVerdict> out;
  for_each_record(in, [&](const std::string& line, std::size_t n) {
    if (line.find("\"problem_id\"") == std::string::npos) {
      const json j = parse_line(line, n);
      if (is_header(j)) {
        check_version(j, n);
        return;
      }
    }
    out.push_back(verdict_from_json(line, n));
  });
  return out;
}

}  // namespace complint::io
