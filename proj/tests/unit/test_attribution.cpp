// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "complint/attribution/attribution.hpp"
#include "support.hpp"

namespace {

using namespace complint;
using attribution::Outcome;
using lint::Diagnostic;
using lint::LintCheckKind;
namespace t = complint::testing;

Diagnostic diag(LintCheckKind k, std::string symbol, int line, int col = 0) {
  Diagnostic d;
  d.kind = k;
  d.symbol = std::move(symbol);
  d.line = line;
  d.column = col;
  return d;
}

TEST(Concatenate, BridgesWithSingleNewline) {
  EXPECT_EQ(attribution::concatenate("a\n", "b\n"), "a\nb\n");
  EXPECT_EQ(attribution::concatenate("a", "b\n"), "a\nb\n");
  EXPECT_EQ(attribution::concatenate("", "b\n"), "b\n");
  EXPECT_EQ(attribution::concatenate("a\n", ""), "a\n");
}

TEST(Diff, EmptyContextFastPath) {
  const std::vector<Diagnostic> full{diag(LintCheckKind::UndefinedName, "factorial", 18)};
  EXPECT_EQ(attribution::diff_diagnostics({}, full, 15), full);
}

TEST(Diff, SameKeyCancelsOnce) {
  const auto ctx = std::vector<Diagnostic>{diag(LintCheckKind::UnusedImport, "urllib", 2)};
  const auto full = std::vector<Diagnostic>{diag(LintCheckKind::UnusedImport, "urllib", 2),
                                            diag(LintCheckKind::UnusedImport, "urllib", 17, 4)};
  const auto out = attribution::diff_diagnostics(ctx, full, 15);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].line, 17);
}

TEST(Diff, SameSymbolDifferentLineSurvives) {
  const auto ctx = std::vector<Diagnostic>{diag(LintCheckKind::UndefinedName, "foo", 5)};
  const auto full = std::vector<Diagnostic>{diag(LintCheckKind::UndefinedName, "foo", 5),
                                            diag(LintCheckKind::UndefinedName, "foo", 40)};
  const auto out = attribution::diff_diagnostics(ctx, full, 30);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].line, 40);
}

TEST(Diff, DuplicateKeysCancelOneForOne) {
  const auto d = diag(LintCheckKind::UndefinedName, "y", 3);
  const auto out = attribution::diff_diagnostics({d}, {d, d, d}, 5);
  EXPECT_EQ(out.size(), 2u);
}

TEST(Diff, PreservesFullOrder) {
  const auto a = diag(LintCheckKind::UnusedVariable, "a", 9), b = diag(LintCheckKind::UndefinedName, "b", 4);
  const auto c = diag(LintCheckKind::UndefinedName, "c", 7);
  const auto out = attribution::diff_diagnostics({c}, {a, c, b}, 3);
  EXPECT_EQ(out, (std::vector<Diagnostic>{a, b}));
}

TEST(Evaluate, AppendixUrllibSplit) {
  const auto text = t::read_file(t::fixture_dir() / "appendix_b" / "08_unused_import.py");
  const auto [ctx, comp] = t::split_after_line(text, 15);
  const auto analysis = attribution::analyze_context(SourceText(ctx));
  ASSERT_TRUE(analysis.parsable);
  EXPECT_TRUE(std::any_of(analysis.diagnostics.begin(), analysis.diagnostics.end(), [](const Diagnostic& d) {
    return d.kind == LintCheckKind::UnusedImport && d.line == 2;
  }));
  const auto v = attribution::evaluate_with_context(analysis, comp);
  ASSERT_EQ(v.outcome, Outcome::Lint);
  const auto imports = std::count_if(v.attributed.begin(), v.attributed.end(),
                                     [](const Diagnostic& d) { return d.kind == LintCheckKind::UnusedImport; });
  EXPECT_EQ(imports, 1);
  EXPECT_TRUE(std::any_of(v.attributed.begin(), v.attributed.end(), [](const Diagnostic& d) {
    return d.kind == LintCheckKind::UnusedImport && d.line == 17 && t::reference_symbol(d) == "urllib.parse";
  }));
}

TEST(Evaluate, Trichotomy) {
  EXPECT_EQ(attribution::evaluate_sample(SourceText("def f(:\n"), "    return 1\n").outcome, Outcome::ContextUnparsable);
  const auto eof = attribution::evaluate_sample(SourceText("def f():\n    \"\"\"Doc.\"\"\"\n"), "    return (1\n");
  ASSERT_EQ(eof.outcome, Outcome::AstError);
  EXPECT_EQ(eof.ast_error->category, pyast::AstErrorCategory::UnexpectedEof);
  EXPECT_TRUE(eof.ast_error->is_eof);
}

TEST(Evaluate, ContextUnparsableCarriesNoClaim) {
  const auto v = attribution::evaluate_sample(SourceText("class A(\n"), "    return (1\n");
  EXPECT_EQ(v.outcome, Outcome::ContextUnparsable);
  EXPECT_FALSE(v.ast_error.has_value());
  EXPECT_TRUE(v.attributed.empty());
  EXPECT_TRUE(attribution::dedup_error_types(v).empty());
}

TEST(Evaluate, FigureOneSample) {
  const auto v = attribution::evaluate_sample(SourceText("def f(a):\n    \"\"\"Doc.\"\"\"\n    unused = 1\n"),
                                              "    return missing(a)\n");
  ASSERT_EQ(v.outcome, Outcome::Lint);
  ASSERT_EQ(v.attributed.size(), 1u);
  EXPECT_EQ(v.attributed[0].kind, LintCheckKind::UndefinedName);
  EXPECT_EQ(v.attributed[0].symbol, "missing");
  EXPECT_EQ(v.context_error_kinds, std::set<LintCheckKind>{LintCheckKind::UnusedVariable});
  EXPECT_EQ(v.undefined_functions, 1);
  EXPECT_EQ(v.undefined_variables, 0);
}

TEST(Evaluate, UndefinedKindsSplit) {
  const auto v = attribution::evaluate_sample(SourceText("def f():\n    \"\"\"Doc.\"\"\"\n"),
                                              "    g(x)\n    return y.z()\n");
  EXPECT_EQ(v.undefined_functions, 1);
  EXPECT_EQ(v.undefined_variables, 2);
}

TEST(Evaluate, RejectsInvalidUtf8) {
  EXPECT_THROW(attribution::evaluate_sample(SourceText("def f():\n    \"\"\"D.\"\"\"\n"), "    return '\xff'\n"),
               attribution::EncodingError);
}

TEST(Evaluate, ContextWithoutTrailingNewline) {
  const auto v = attribution::evaluate_sample(SourceText("def f(a):\n    \"\"\"Doc.\"\"\""), "    return a\n");
  EXPECT_EQ(v.outcome, Outcome::Lint);
  EXPECT_TRUE(v.attributed.empty());
}

TEST(Dedup, CountsEachTypeOnce) {
  attribution::SampleVerdict v;
  v.outcome = Outcome::Lint;
  v.attributed = {diag(LintCheckKind::UndefinedName, "a", 10), diag(LintCheckKind::UndefinedName, "b", 12),
                  diag(LintCheckKind::UnusedVariable, "c", 11)};
  const auto types = attribution::dedup_error_types(v);
  EXPECT_EQ(types, (std::set<attribution::ErrorType>{LintCheckKind::UndefinedName, LintCheckKind::UnusedVariable}));
}

TEST(Dedup, AstErrorIsSingleCategory) {
  attribution::SampleVerdict v;
  v.outcome = Outcome::AstError;
  v.ast_error = pyast::SyntaxErrorReport{pyast::AstErrorCategory::PrintMissingParentheses, false, 6, 8, "m"};
  EXPECT_EQ(attribution::dedup_error_types(v),
            (std::set<attribution::ErrorType>{pyast::AstErrorCategory::PrintMissingParentheses}));
  EXPECT_EQ(attribution::error_type_name(pyast::AstErrorCategory::PrintMissingParentheses),
            "ast:PrintMissingParentheses");
  EXPECT_EQ(attribution::error_type_name(LintCheckKind::UndefinedName), "lint:UndefinedName");
}

TEST(DiffProperties, RandomDiagnosticMultisets) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    auto random_list = [&](std::size_t n) {
      std::vector<Diagnostic> out;
      for (std::size_t i = 0; i < n; ++i) {
        out.push_back(diag(static_cast<LintCheckKind>(rng() % 3), std::string(1, static_cast<char>('a' + rng() % 3)),
                           1 + static_cast<int>(rng() % 6)));
      }
      return out;
    };
    const auto ctx = random_list(rng() % 6);
    const auto full = random_list(rng() % 10);
    const auto out = attribution::diff_diagnostics(ctx, full, 4);
    EXPECT_GE(out.size() + ctx.size(), full.size());
    EXPECT_LE(out.size(), full.size());
    // Oracle: per-key surplus of full over ctx.
    std::map<std::tuple<LintCheckKind, std::string, int>, int> surplus;
    for (const auto& d : full) ++surplus[{d.kind, d.symbol, d.line}];
    for (const auto& d : ctx) --surplus[{d.kind, d.symbol, d.line}];
    std::map<std::tuple<LintCheckKind, std::string, int>, int> got;
    for (const auto& d : out) ++got[{d.kind, d.symbol, d.line}];
    for (const auto& [k, n] : surplus) EXPECT_EQ(got[k], std::max(0, n));
    // Order: out is a subsequence of full.
    std::size_t j = 0;
    for (const auto& d : full) {
      if (j < out.size() && out[j] == d) ++j;
    }
    EXPECT_EQ(j, out.size());
  }
}

}  // namespace
