// SPDX-License-Identifier: Apache-2.0
// complint: extract / eval / report / lint.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "complint/attribution/attribution.hpp"
#include "complint/dataset/dataset.hpp"
#include "complint/eval/eval.hpp"
#include "complint/io/jsonl.hpp"
#include "complint/io/report.hpp"
#include "complint/lint/lint.hpp"
#include "complint/metrics/metrics.hpp"
#include "complint/pyast/parser.hpp"

namespace fs = std::filesystem;
using namespace complint;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ifstream open_input(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("no such file: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  return in;
}

/// Writes through a sibling temp file and renames, so reruns replace
/// partial outputs instead of appending to them.
void write_atomically(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + tmp.string());
    out << content;
    if (!out) throw UsageError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

int default_jobs() {
  const char* env = std::getenv("COMPLINT_JOBS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) throw UsageError(std::string("invalid COMPLINT_JOBS: ") + env);
  return static_cast<int>(v);
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
  std::string root;
  std::uint64_t seed = 0;
  int min_ctx = 64;
  int max_ctx = 768;
  int max_gt = 256;
  std::string out;
  bool top_level_only = false;
  std::uintmax_t max_file_bytes = 1u << 20;
  int jobs = 0;
};

int cmd_extract(const ExtractArgs& a) {
  if (!fs::is_directory(a.root)) throw UsageError("root is not a readable directory: " + a.root);
  if (a.min_ctx < 0 || a.max_ctx < a.min_ctx || a.max_gt < 1) throw UsageError("inconsistent token bounds");
  dataset::ExtractOptions opts;
  opts.min_context_tokens = a.min_ctx;
  opts.max_context_tokens = a.max_ctx;
  opts.max_groundtruth_tokens = a.max_gt;
  opts.include_nested = !a.top_level_only;
  opts.max_file_bytes = a.max_file_bytes;
  const int jobs = a.jobs > 0 ? a.jobs : default_jobs();
  const auto& counter = dataset::default_token_counter();
  const auto result = dataset::extract_tree(a.root, a.seed, counter, opts, jobs);

  std::ostringstream out;
  io::write_problems(out, io::ProblemsHeader{io::kFormatVersion, counter.name, a.seed}, result.problems);
  write_atomically(a.out, out.str());

  std::cout << "files: " << result.stats.files << "\n";
  std::cout << "problems: " << result.stats.problems << "\n";
  for (std::size_t i = 0; i < dataset::kSkipReasonCount; ++i) {
    std::cout << "skipped." << dataset::skip_reason_name(static_cast<dataset::SkipReason>(i)) << ": "
              << result.stats.skipped[i] << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string problems;
  std::string completions;
  std::string out;
  int jobs = 0;
};

int cmd_eval(const EvalArgs& a) {
  auto pin = open_input(a.problems);
  auto cin = open_input(a.completions);
  const int jobs = a.jobs > 0 ? a.jobs : default_jobs();
  io::ProblemsFile problems;
  try {
    problems = io::read_problems(pin);
  } catch (const io::DataError& e) {
    throw io::DataError(a.problems + ": " + e.what());
  }
  io::CompletionsFile completions;
  try {
    completions = io::read_completions(cin);
  } catch (const io::DataError& e) {
    throw io::DataError(a.completions + ": " + e.what());
  }
  eval::EvalOutput result;
  try {
    result = eval::evaluate_all(problems.problems, completions.samples, jobs);
  } catch (const eval::EvalError& e) {
    throw io::DataError(e.what());
  }
  for (const auto& [id, sample] : result.orphans) {
    spdlog::warn("completion ({}, {}) references unknown problem; skipped", id, sample);
  }
  const std::size_t bad_utf8 = completions.invalid_utf8 + result.stats.invalid_utf8;
  if (bad_utf8 > 0) spdlog::warn("{} completion(s) with invalid UTF-8 skipped", bad_utf8);

  std::ostringstream out;
  io::write_verdicts(out, result.verdicts);
  write_atomically(a.out, out.str());
  std::cerr << "verdicts: " << result.stats.verdicts << ", orphans: " << result.stats.orphans
            << ", invalid_utf8: " << bad_utf8 << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string verdicts;
  std::string out = "-";
  std::string csv;
  bool conditional = false;
  bool include_unused_import = false;
  bool similarity = false;
  std::string problems;
  std::string completions;
};

int cmd_report(const ReportArgs& a) {
  auto vin = open_input(a.verdicts);
  if (a.similarity && (a.problems.empty() || a.completions.empty())) {
    throw UsageError("--similarity needs --problems and --completions");
  }
  std::vector<attribution::SampleVerdict> verdicts;
  try {
    verdicts = io::read_verdicts(vin);
  } catch (const io::DataError& e) {
    throw io::DataError(a.verdicts + ": " + e.what());
  }
  if (verdicts.empty()) throw io::DataError("no samples");

  metrics::Aggregate agg;
  try {
    agg = metrics::aggregate_partial(verdicts);
  } catch (const metrics::MetricsError& e) {
    throw io::DataError(e.what());
  }
  auto report = metrics::finalize(agg);

  io::RunMetadata run{{"verdicts", fs::path(a.verdicts).filename().string()}, {"tool", "complint"}};
  if (a.similarity) {
    auto pin = open_input(a.problems);
    auto cin = open_input(a.completions);
    const auto problems = io::read_problems(pin);
    auto completions = io::read_completions(cin);
    std::map<std::string, const dataset::Problem*> by_id;
    for (const auto& p : problems.problems) by_id[p.id] = &p;
    std::sort(completions.samples.begin(), completions.samples.end(), [](const auto& x, const auto& y) {
      return std::tie(x.problem_id, x.sample_index) < std::tie(y.problem_id, y.sample_index);
    });
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : completions.samples) {
      const auto it = by_id.find(s.problem_id);
      if (it == by_id.end()) continue;
      sum += metrics::edit_similarity(s.completion, it->second->groundtruth);
      ++n;
    }
    if (n > 0) report.edit_similarity_mean = sum / static_cast<double>(n);
    run["similarity_pairs"] = std::to_string(n);
  }

  std::optional<metrics::ConditionalReport> cond;
  if (a.conditional) cond = metrics::conditional_from(agg, a.include_unused_import);
  write_atomically(a.out, io::report_to_json(report, cond, run));
  if (!a.csv.empty()) write_atomically(a.csv, io::report_to_csv(report, cond, run));
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_lint(const std::string& file) {
  if (!fs::is_regular_file(file)) throw UsageError("no such file: " + file);
  const SourceText src(read_file(file));
  const auto parsed = pyast::parse_module(src);
  if (!parsed.ok()) {
    const auto& e = parsed.error();
    std::cout << e.line << ":" << e.column << " " << pyast::category_name(e.category)
              << (e.is_eof ? " (eof) " : " ") << e.raw_message << "\n";
    return kExitOk;
  }
  for (const auto& d : lint::analyze(parsed.ast(), src, lint::all_checks())) {
    std::cout << d.line << ":" << d.column << " " << lint::check_kind_name(d.kind) << " " << d.symbol << " "
              << d.message << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("complint"));
  spdlog::set_pattern("%^%l%$: %v");

  CLI::App app{"Static evaluation of generated Python function completions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "complint 1.0.0");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Build a function-completion corpus from a tree of .py files");
  extract->add_option("--root", ex.root, "Source tree")->required();
  extract->add_option("--seed", ex.seed, "Selection seed");
  extract->add_option("--min-context-tokens", ex.min_ctx)->capture_default_str();
  extract->add_option("--max-context-tokens", ex.max_ctx)->capture_default_str();
  extract->add_option("--max-groundtruth-tokens", ex.max_gt, "Exclusive upper bound")->capture_default_str();
  extract->add_option("--max-file-bytes", ex.max_file_bytes)->capture_default_str();
  extract->add_flag("--top-level-only", ex.top_level_only, "Skip methods and nested functions");
  extract->add_option("--jobs", ex.jobs, "Worker count (default: COMPLINT_JOBS or 1)")->check(CLI::PositiveNumber);
  extract->add_option("--out", ex.out, "problems.jsonl")->required();

  EvalArgs ev;
  auto* evaluate = app.add_subcommand("eval", "Evaluate completions against their problems");
  evaluate->add_option("--problems", ev.problems)->required();
  evaluate->add_option("--completions", ev.completions)->required();
  evaluate->add_option("--out", ev.out, "verdicts.jsonl")->required();
  evaluate->add_option("--jobs", ev.jobs, "Worker count (default: COMPLINT_JOBS or 1)")->check(CLI::PositiveNumber);

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "Aggregate verdicts into rate tables");
  report->add_option("--verdicts", rp.verdicts)->required();
  report->add_option("--out", rp.out, "JSON report path, '-' for stdout")->capture_default_str();
  report->add_option("--csv", rp.csv, "Also write a CSV table");
  report->add_flag("--conditional", rp.conditional, "Add P(e in x | e in c) statistics");
  report->add_flag("--include-unused-import", rp.include_unused_import, "Keep UnusedImport in conditionals");
  report->add_flag("--similarity", rp.similarity, "Add mean edit similarity (needs --problems, --completions)");
  report->add_option("--problems", rp.problems);
  report->add_option("--completions", rp.completions);

  std::string lint_file;
  auto* lint_cmd = app.add_subcommand("lint", "Print diagnostics for one file");
  lint_cmd->add_option("file", lint_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (extract->parsed()) return cmd_extract(ex);
    if (evaluate->parsed()) return cmd_eval(ev);
    if (report->parsed()) return cmd_report(rp);
    if (lint_cmd->parsed()) return cmd_lint(lint_file);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const io::DataError& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
  return kExitUsage;
}
