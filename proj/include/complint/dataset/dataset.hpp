// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "complint/pyast/ast.hpp"
#include "complint/pyast/source_text.hpp"

namespace complint::dataset {

struct Problem {
  std::string id;
  std::string path;
  std::string context;
  std::string groundtruth;
  int context_tokens = 0;
  int groundtruth_tokens = 0;

  friend bool operator==(const Problem&, const Problem&) = default;
};

struct FunctionSpan {
  std::string name;
  pyast::Span header_span;
  pyast::Span docstring_span;
  pyast::Span body_span;
  bool is_method = false;
  bool is_async = false;
  bool is_nested = false;  // defined inside another function
};

struct TokenCounter {
  std::string name;
  std::function<std::size_t(std::string_view)> count;
};

/// Identifier/number runs count as one token, every other non-whitespace
/// byte as one. Non-ASCII bytes are treated as identifier characters.
std::size_t count_tokens_default(std::string_view text) noexcept;
const TokenCounter& default_token_counter();

enum class SkipReason : std::uint8_t {
  Unparsable,
  NoDocstringFunction,
  ContextTooShort,
  ContextTooLong,
  GroundtruthTooLong,
  NotUtf8,
  TooLarge,
  Unreadable,
};

inline constexpr std::size_t kSkipReasonCount = 8;
std::string_view skip_reason_name(SkipReason r) noexcept;

struct ExtractOptions {
  int min_context_tokens = 64;
  int max_context_tokens = 768;
  int max_groundtruth_tokens = 256;  // exclusive
  bool include_nested = true;        // nested functions and methods
  std::uintmax_t max_file_bytes = 1u << 20;
};

/// Functions whose first body statement is a string literal, in document
/// order.
std::vector<FunctionSpan> enumerate_candidates(const pyast::Ast& ast, const SourceText& source);

using ExtractResult = std::variant<Problem, SkipReason>;

/// Picks one docstring function uniformly, keyed by (seed, path), and cuts
/// context/groundtruth around it.
ExtractResult extract_problem(const SourceText& source, const std::string& path, std::uint64_t seed,
                              const TokenCounter& counter, const ExtractOptions& options = {});

struct ExtractStats {
  std::size_t files = 0;
  std::size_t problems = 0;
  std::array<std::size_t, kSkipReasonCount> skipped{};
};

struct ExtractionOutput {
  std::vector<Problem> problems;  // ordered by path
  ExtractStats stats;
};

/// All `*.py` files under `root`, relative and '/'-separated, sorted.
std::vector<std::string> list_python_files(const std::filesystem::path& root);

/// Extracts over a tree. `jobs` > 1 uses OpenMP; jobs == 1 is the serial
/// reference path. Output does not depend on `jobs`.
ExtractionOutput extract_tree(const std::filesystem::path& root, std::uint64_t seed, const TokenCounter& counter,
                              const ExtractOptions& options = {}, int jobs = 1);

}  // namespace complint::dataset
