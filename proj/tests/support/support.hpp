// SPDX-License-Identifier: Apache-2.0
// Fixture loading and synthetic data shared by unit tests, the acceptance
// runner and the benchmark.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "complint/attribution/attribution.hpp"
#include "complint/dataset/dataset.hpp"
#include "complint/lint/diagnostic.hpp"
#include "complint/pyast/syntax_error.hpp"

namespace complint::testing {

std::filesystem::path fixture_dir();
std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

/// Fresh empty directory under the system temp dir.
std::filesystem::path make_temp_dir(const std::string& tag);

// -- differential corpus ----------------------------------------------------

struct Snippet {
  std::string name;
  std::string source;
};

/// Splits a `### name` separated file.
std::vector<Snippet> load_snippets(const std::filesystem::path& p);

struct RefDiag {
  std::string kind;
  std::string symbol;
  int line = 0;
  friend bool operator==(const RefDiag&, const RefDiag&) = default;
  friend auto operator<=>(const RefDiag&, const RefDiag&) = default;
};

struct RefEntry {
  std::string name;
  std::vector<RefDiag> diagnostics;
};

std::vector<RefEntry> load_reference(const std::filesystem::path& p);

/// Symbol as the reference linter reports it: the import text for
/// UnusedImport, nothing for FStringMissingPlaceholders.
std::string reference_symbol(const lint::Diagnostic& d);

/// Lints `source` and returns sorted reference-style triples; nullopt when
/// the snippet does not parse.
std::optional<std::vector<RefDiag>> lint_as_reference(const std::string& source);

// -- golden listings ----------------------------------------------------------

struct GoldenCase {
  std::string file;
  int context_lines;  // context = first N lines, through the docstring end
  attribution::Outcome outcome;
  std::optional<pyast::AstErrorCategory> category;
  std::optional<lint::LintCheckKind> kind;
  std::string symbol;  // empty: not checked
  int line;
  std::optional<lint::NameKind> name_kind;
};

const std::vector<GoldenCase>& golden_cases();

/// Splits `text` after its first `n` lines.
std::pair<std::string, std::string> split_after_line(const std::string& text, int n);

// -- synthetic data -------------------------------------------------------------

struct SyntheticCorpus {
  std::vector<dataset::Problem> problems;
  std::vector<attribution::CompletionSample> samples;
};

/// Deterministic corpus of roughly 40-line contexts and 15-line completions
/// with a mix of clean, lint-error and syntax-error completions.
SyntheticCorpus make_synthetic_corpus(std::size_t samples, std::size_t per_problem, std::uint64_t seed);

/// (context, completion) assembled from snippet fragments.
std::pair<std::string, std::string> random_fragment_pair(std::mt19937_64& rng);

/// Random verdict with a unique key derived from `index`.
attribution::SampleVerdict random_verdict(std::mt19937_64& rng, std::size_t index);

/// Writes `count` Python files (mixed valid, invalid, docstringed and not)
/// below `root`, including subdirectories.
void write_fixture_tree(const std::filesystem::path& root, std::size_t count, std::uint64_t seed);

}  // namespace complint::testing
