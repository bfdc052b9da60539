// SPDX-License-Identifier: Apache-2.0
#include "complint/dataset/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "complint/pyast/parser.hpp"

namespace complint::dataset {

namespace {

using pyast::NodeId;
using pyast::NodeKind;
namespace f = pyast::field;

bool is_word_byte(unsigned char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

bool is_space_byte(unsigned char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) noexcept {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Byte offset just past the terminator of each line; lines split like the
/// lexer does (\n, \r\n, lone \r).
std::vector<std::size_t> line_ends(std::string_view text) {
  std::vector<std::size_t> ends;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ends.push_back(i + 1);
    } else if (text[i] == '\n') {
      ends.push_back(i + 1);
    }
  }
  if (ends.empty() || ends.back() != text.size()) ends.push_back(text.size());
  return ends;
}

std::size_t end_of_line(const std::vector<std::size_t>& ends, int line) {
  const auto idx = static_cast<std::size_t>(std::max(line, 1) - 1);
  return idx < ends.size() ? ends[idx] : ends.back();
}

std::size_t pick_index(std::uint64_t seed, const std::string& path, std::size_t n) {
  const std::uint64_t h = fnv1a(path);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  std::mt19937_64 rng(seq);
  // Rejection sampling keeps the choice uniform and library-independent.
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return static_cast<std::size_t>(r % n);
}

void collect(const pyast::Ast& ast, NodeId id, bool in_function, bool in_class_body,
             std::vector<FunctionSpan>& out) {
  const auto k = ast.kind(id);
  const bool is_fn = k == NodeKind::FunctionDef || k == NodeKind::AsyncFunctionDef;
  if (is_fn) {
    const auto body = ast.children(id, f::kFnBody);
    if (!body.empty() && ast.kind(body.front()) == NodeKind::Expr) {
      const NodeId v = ast.child(body.front(), f::kValue);
      const auto& vn = ast.node(v);
      if (vn.kind == NodeKind::Constant && static_cast<pyast::ConstKind>(vn.op) == pyast::ConstKind::Str) {
        const auto& fn = ast.node(id);
        FunctionSpan span;
        span.name = fn.ident;
        const auto& doc = ast.node(body.front()).span;
        span.header_span = {fn.lineno, fn.col_offset, doc.line, doc.col};
        span.docstring_span = doc;
        span.body_span = {doc.line, doc.col, ast.node(body.back()).span.end_line, ast.node(body.back()).span.end_col};
        span.is_method = in_class_body;
        span.is_async = k == NodeKind::AsyncFunctionDef;
        span.is_nested = in_function;
        out.push_back(std::move(span));
      }
    }
  }
  const bool child_in_function = in_function || is_fn || k == NodeKind::Lambda;
  const bool child_in_class = k == NodeKind::ClassDef;
  ast.for_each_child(id, [&](NodeId c) {
    collect(ast, c, child_in_function, child_in_class && !is_fn, out);
  });
}

}  // namespace

std::size_t count_tokens_default(std::string_view text) noexcept {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space_byte(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      ++n;
      while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    } else {
      ++n;
      ++i;
    }
  }
  return n;
}

const TokenCounter& default_token_counter() {
  static const TokenCounter counter{"word-punct-v1", [](std::string_view t) { return count_tokens_default(t); }};
  return counter;
}

std::string_view skip_reason_name(SkipReason r) noexcept {
  switch (r) {
    case SkipReason::Unparsable: return "unparsable";
    case SkipReason::NoDocstringFunction: return "no_docstring_function";
    case SkipReason::ContextTooShort: return "context_too_short";
    case SkipReason::ContextTooLong: return "context_too_long";
    case SkipReason::GroundtruthTooLong: return "groundtruth_too_long";
    case SkipReason::NotUtf8: return "not_utf8";
    case SkipReason::TooLarge: return "too_large";
    case SkipReason::Unreadable: return "unreadable";
  }
  return "?";
}

std::vector<FunctionSpan> enumerate_candidates(const pyast::Ast& ast, const SourceText& /*source*/) {
  std::vector<FunctionSpan> out;
  if (ast.root() == pyast::kNoNode) return out;
  collect(ast, ast.root(), false, false, out);
  std::stable_sort(out.begin(), out.end(), [](const FunctionSpan& a, const FunctionSpan& b) {
    return std::tie(a.header_span.line, a.header_span.col) < std::tie(b.header_span.line, b.header_span.col);
  });
  return out;
}

ExtractResult extract_problem(const SourceText& source, const std::string& path, std::uint64_t seed,
                              const TokenCounter& counter, const ExtractOptions& options) {
  if (source.text().size() > options.max_file_bytes) return SkipReason::TooLarge;
  if (!is_valid_utf8(source.view())) return SkipReason::NotUtf8;
  const auto parsed = pyast::parse_module(source);
  if (!parsed.ok()) return SkipReason::Unparsable;
  auto candidates = enumerate_candidates(parsed.ast(), source);
  if (!options.include_nested) {
    std::erase_if(candidates, [](const FunctionSpan& s) { return s.is_nested || s.is_method; });
  }
  if (candidates.empty()) return SkipReason::NoDocstringFunction;

  const FunctionSpan& pick = candidates[pick_index(seed, path, candidates.size())];
  const auto ends = line_ends(source.view());
  const std::size_t ctx_end = end_of_line(ends, pick.docstring_span.end_line);
  const std::size_t gt_end = std::max(ctx_end, end_of_line(ends, pick.body_span.end_line));

  Problem p;
  p.path = path;
  p.context = source.text().substr(0, ctx_end);
  p.groundtruth = source.text().substr(ctx_end, gt_end - ctx_end);
  p.context_tokens = static_cast<int>(counter.count(p.context));
  p.groundtruth_tokens = static_cast<int>(counter.count(p.groundtruth));
  if (p.context_tokens < options.min_context_tokens) return SkipReason::ContextTooShort;
  if (p.context_tokens > options.max_context_tokens) return SkipReason::ContextTooLong;
  if (p.groundtruth_tokens >= options.max_groundtruth_tokens) return SkipReason::GroundtruthTooLong;

  char buf[17];
  std::string key = path;
  key += '\0';
  key += std::to_string(pick.header_span.line) + ":" + std::to_string(pick.header_span.col) + "-" +
         std::to_string(ctx_end) + "-" + std::to_string(gt_end);
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(key)));
  p.id = buf;
  return p;
}

std::vector<std::string> list_python_files(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw fs::filesystem_error("not a directory", root, std::make_error_code(std::errc::not_a_directory));
  std::vector<std::string> files;
  for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
       it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file() || it->path().extension() != ".py") continue;
    files.push_back(fs::relative(it->path(), root).generic_string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

ExtractionOutput extract_tree(const std::filesystem::path& root, std::uint64_t seed, const TokenCounter& counter,
                              const ExtractOptions& options, int jobs) {
  const auto files = list_python_files(root);
  std::vector<ExtractResult> results(files.size(), SkipReason::Unreadable);
  const auto n = static_cast<long>(files.size());

  auto work = [&](long i) {
    const auto& rel = files[static_cast<std::size_t>(i)];
    const auto full = root / rel;
    std::error_code ec;
    const auto size = std::filesystem::file_size(full, ec);
    if (ec) return;
    if (size > options.max_file_bytes) {
      results[static_cast<std::size_t>(i)] = SkipReason::TooLarge;
      return;
    }
    std::ifstream in(full, std::ios::binary);
    if (!in) return;
    std::ostringstream ss;
    ss << in.rdbuf();
    results[static_cast<std::size_t>(i)] = extract_problem(SourceText(ss.str()), rel, seed, counter, options);
  };

  if (jobs > 1) {
#pragma omp parallel for schedule(dynamic, 4) num_threads(jobs)
    for (long i = 0; i < n; ++i) work(i);
  } else {
    for (long i = 0; i < n; ++i) work(i);
  }

  ExtractionOutput out;
  out.stats.files = files.size();
  for (auto& r : results) {
    if (auto* p = std::get_if<Problem>(&r)) {
      out.problems.push_back(std::move(*p));
    } else {
      ++out.stats.skipped[static_cast<std::size_t>(std::get<SkipReason>(r))];
    }
  }
  out.stats.problems = out.problems.size();
  return out;
}

}  // namespace complint::dataset
