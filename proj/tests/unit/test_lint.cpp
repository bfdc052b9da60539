// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "complint/lint/lint.hpp"
#include "complint/pyast/parser.hpp"
#include "support.hpp"

namespace {

using namespace complint;
using lint::Diagnostic;
using lint::LintCheckKind;
namespace t = complint::testing;

std::vector<Diagnostic> lint_source(const std::string& text, const lint::CheckSet& checks = lint::all_checks()) {
  const SourceText src(text);
  const auto r = pyast::parse_module(src);
  if (!r.ok()) ADD_FAILURE() << "unparsable: " << r.error().raw_message;
  return r.ok() ? lint::analyze(r.ast(), src, checks) : std::vector<Diagnostic>{};
}

std::size_t count_kind(const std::vector<Diagnostic>& ds, LintCheckKind k) {
  return static_cast<std::size_t>(std::count_if(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.kind == k; }));
}

// -- reference agreement, one test per snippet ---------------------------------

struct DiffCase {
  t::Snippet snippet;
  std::vector<t::RefDiag> expected;
};

std::vector<DiffCase> differential_cases() {
  const auto dir = t::fixture_dir() / "differential";
  std::map<std::string, std::vector<t::RefDiag>> ref;
  for (auto& e : t::load_reference(dir / "reference.jsonl")) ref[e.name] = std::move(e.diagnostics);
  std::vector<DiffCase> out;
  for (auto& s : t::load_snippets(dir / "snippets.txt")) out.push_back({s, ref[s.name]});
  return out;
}

class Differential : public ::testing::TestWithParam<DiffCase> {};

TEST_P(Differential, MatchesReference) {
  const auto& c = GetParam();
  const auto got = t::lint_as_reference(c.snippet.source);
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(*got, c.expected);
}

INSTANTIATE_TEST_SUITE_P(Snippets, Differential, ::testing::ValuesIn(differential_cases()),
                         [](const auto& info) { return info.param.snippet.name; });

TEST(Differential, CorpusIsLargeEnough) { EXPECT_GE(differential_cases().size(), 200u); }

// -- listed examples ------------------------------------------------------------

TEST(Lint, AppendixListings) {
  const auto dir = t::fixture_dir() / "appendix_b";
  auto find = [](const std::vector<Diagnostic>& ds, LintCheckKind k, int line) {
    return std::find_if(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.kind == k && d.line == line; });
  };
  const auto fact = lint_source(t::read_file(dir / "05_undefined_name.py"));
  ASSERT_EQ(fact.size(), 1u);
  EXPECT_EQ(fact[0].kind, LintCheckKind::UndefinedName);
  EXPECT_EQ(fact[0].symbol, "factorial");
  EXPECT_EQ(fact[0].line, 18);

  const auto unused = lint_source(t::read_file(dir / "06_unused_variable.py"));
  const auto u = find(unused, LintCheckKind::UnusedVariable, 15);
  ASSERT_NE(u, unused.end());
  EXPECT_EQ(u->symbol, "encoding_check");

  const auto fs = lint_source(t::read_file(dir / "07_fstring_placeholders.py"));
  EXPECT_NE(find(fs, LintCheckKind::FStringMissingPlaceholders, 15), fs.end());

  const auto redef = lint_source(t::read_file(dir / "09_redefined_unused.py"));
  const auto r = find(redef, LintCheckKind::RedefinedWhileUnused, 6);
  ASSERT_NE(r, redef.end());
  EXPECT_EQ(r->symbol, "dsl");
  EXPECT_EQ(r->related_line, 2);

  const auto local = lint_source(t::read_file(dir / "10_undefined_local.py"));
  const auto l = find(local, LintCheckKind::UndefinedLocal, 18);
  ASSERT_NE(l, local.end());
  EXPECT_EQ(l->symbol, "cnt");
  EXPECT_EQ(l->related_line, 16);
  EXPECT_EQ(l->message, "local variable 'cnt' defined in enclosing scope on line 16 referenced before assignment");
}

TEST(Lint, ClassScopeDoesNotEncloseFunctions) {
  const auto ds = lint_source("class C:\n  x=1\ndef g(): return x\n");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].kind, LintCheckKind::UndefinedName);
  EXPECT_EQ(ds[0].symbol, "x");
  EXPECT_EQ(ds[0].line, 3);
}

TEST(Lint, StarImportOpensScope) {
  const auto ds = lint_source("from m import *\nfoo()\n");
  EXPECT_EQ(count_kind(ds, LintCheckKind::UndefinedName), 0u);
}

TEST(Lint, DeferredFunctionBodies) {
  EXPECT_TRUE(lint_source("def f():\n    return later\nlater = 1\n").empty());
  EXPECT_EQ(lint_source("print(later)\nlater = 1\n").size(), 1u);
}

TEST(Lint, DiagnosticsSortedByLineColumnKind) {
  const auto ds = lint_source("import os\ndef f():\n    x = f\"a\"\n    return y + z\n");
  ASSERT_GE(ds.size(), 4u);
  EXPECT_TRUE(std::is_sorted(ds.begin(), ds.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.line, a.column, a.kind) < std::tie(b.line, b.column, b.kind);
  }));
}

// -- scopes -----------------------------------------------------------------------

TEST(Scopes, FunctionParameterUsed) {
  const SourceText src("def f(a): return a\n");
  const auto r = pyast::parse_module(src);
  ASSERT_TRUE(r.ok());
  const auto tree = lint::build_scopes(r.ast());
  ASSERT_GE(tree.scopes.size(), 2u);
  EXPECT_EQ(tree.scopes[0].kind, lint::ScopeKind::Module);
  const auto& mod = tree.scopes[0].bindings;
  ASSERT_TRUE(std::any_of(mod.begin(), mod.end(), [](const lint::Binding& b) { return b.name == "f"; }));
  const auto fn = std::find_if(tree.scopes.begin(), tree.scopes.end(),
                               [](const lint::Scope& s) { return s.kind == lint::ScopeKind::Function; });
  ASSERT_NE(fn, tree.scopes.end());
  const auto a = std::find_if(fn->bindings.begin(), fn->bindings.end(), [](const lint::Binding& b) { return b.name == "a"; });
  ASSERT_NE(a, fn->bindings.end());
  EXPECT_EQ(a->kind, lint::BindingKind::Parameter);
  EXPECT_TRUE(a->used);
}

TEST(Scopes, ExactlyOneModuleScopeAtRoot) {
  for (const auto& s : t::load_snippets(t::fixture_dir() / "differential" / "snippets.txt")) {
    const SourceText src(s.source);
    const auto r = pyast::parse_module(src);
    ASSERT_TRUE(r.ok());
    const auto tree = lint::build_scopes(r.ast());
    ASSERT_FALSE(tree.scopes.empty());
    EXPECT_EQ(tree.scopes[0].parent, -1) << s.name;
    const auto modules = std::count_if(tree.scopes.begin(), tree.scopes.end(),
                                       [](const lint::Scope& sc) { return sc.kind == lint::ScopeKind::Module; });
    EXPECT_EQ(modules, 1) << s.name;
    for (std::size_t i = 1; i < tree.scopes.size(); ++i) {
      EXPECT_GE(tree.scopes[i].parent, 0) << s.name;
      EXPECT_LT(tree.scopes[i].parent, static_cast<int>(i)) << s.name;
    }
  }
}

// -- callee classification -----------------------------------------------------------

lint::NameKind classify_first_undefined(const std::string& text) {
  const SourceText src(text);
  const auto r = pyast::parse_module(src);
  EXPECT_TRUE(r.ok());
  const auto ds = lint::analyze(r.ast(), src, {LintCheckKind::UndefinedName});
  EXPECT_EQ(ds.size(), 1u);
  return lint::classify_undefined_kind(ds.at(0), r.ast());
}

TEST(Classify, CalleeIsFunction) {
  EXPECT_EQ(classify_first_undefined("num = 1\nprint(factorial(num))\n"), lint::NameKind::Function);
}

TEST(Classify, OperandIsVariable) {
  EXPECT_EQ(classify_first_undefined("def f():\n    return x + 1\n"), lint::NameKind::Variable);
}

TEST(Classify, AttributeBaseIsVariable) { EXPECT_EQ(classify_first_undefined("foo.bar()\n"), lint::NameKind::Variable); }

TEST(Classify, ArgumentIsVariable) { EXPECT_EQ(classify_first_undefined("print(value)\n"), lint::NameKind::Variable); }

TEST(Classify, MissingLocationFallsBackToVariable) {
  const SourceText src("x = 1\n");
  const auto r = pyast::parse_module(src);
  Diagnostic d;
  d.kind = LintCheckKind::UndefinedName;
  d.symbol = "nowhere";
  d.line = 1;
  d.column = 0;
  EXPECT_EQ(lint::classify_undefined_kind(d, r.ast()), lint::NameKind::Variable);
}

// -- properties ----------------------------------------------------------------------

TEST(LintProperties, EmptyModule) { EXPECT_TRUE(lint_source("").empty()); }

TEST(LintProperties, BuiltinsNeverUndefined) {
  std::string text;
  for (const auto& name : lint::builtin_names()) text += "print(" + std::string(name) + ")\n";
  EXPECT_EQ(count_kind(lint_source(text), LintCheckKind::UndefinedName), 0u);
  EXPECT_TRUE(lint::is_builtin("len"));
  EXPECT_FALSE(lint::is_builtin("factorial"));
}

TEST(LintProperties, AddingUnusedLocalAddsExactlyOneDiagnostic) {
  const auto snippets = t::load_snippets(t::fixture_dir() / "differential" / "snippets.txt");
  std::size_t tried = 0;
  for (const auto& s : snippets) {
    // Inject after the first top-level `def` header line whose body is indented by four spaces.
    const auto pos = s.source.find("def ");
    if (pos != 0) continue;
    const auto eol = s.source.find('\n');
    if (eol == std::string::npos || s.source.compare(eol + 1, 4, "    ") != 0 || s.source[eol + 5] == ' ') continue;
    const auto header = s.source.substr(0, eol);
    if (header.back() != ':' || s.source.compare(eol + 5, 3, "\"\"\"") == 0) continue;
    // A locals() call marks every local as used.
    if (s.source.find("locals()") != std::string::npos) continue;
    const std::string mutated = s.source.substr(0, eol + 1) + "    injected_local_v = 7\n" + s.source.substr(eol + 1);
    const auto before = lint_source(s.source);
    const auto after = lint_source(mutated);
    ASSERT_EQ(after.size(), before.size() + 1) << s.name;
    std::vector<Diagnostic> shifted;
    bool found = false;
    for (auto d : after) {
      if (d.kind == LintCheckKind::UnusedVariable && d.symbol == "injected_local_v") {
        EXPECT_EQ(d.line, 2) << s.name;
        found = true;
        continue;
      }
      if (d.line > 1) --d.line;
      if (d.related_line && *d.related_line > 1) --*d.related_line;
      shifted.push_back(d);
    }
    EXPECT_TRUE(found) << s.name;
    auto strip_msg = [](std::vector<Diagnostic> v) {
      for (auto& d : v) d.message.clear();
      return v;
    };
    EXPECT_EQ(strip_msg(shifted), strip_msg(before)) << s.name;
    ++tried;
  }
  EXPECT_GE(tried, 30u);
}

TEST(LintProperties, ReadingRemovesUnusedDiagnostic) {
  const auto unused = lint_source("import os\ndef f():\n    v = 1\n");
  EXPECT_EQ(count_kind(unused, LintCheckKind::UnusedImport), 1u);
  EXPECT_EQ(count_kind(unused, LintCheckKind::UnusedVariable), 1u);
  const auto used = lint_source("import os\ndef f():\n    v = 1\n    return v, os\n");
  EXPECT_TRUE(used.empty());
}

TEST(LintProperties, CheckSubsetIsFilterOfFullRun) {
  for (const auto& s : t::load_snippets(t::fixture_dir() / "differential" / "snippets.txt")) {
    const auto all = lint_source(s.source);
    for (std::size_t k = 0; k < lint::kLintCheckKindCount; ++k) {
      const auto kind = static_cast<LintCheckKind>(k);
      std::vector<Diagnostic> expected;
      std::copy_if(all.begin(), all.end(), std::back_inserter(expected),
                   [&](const Diagnostic& d) { return d.kind == kind; });
      EXPECT_EQ(lint_source(s.source, {kind}), expected) << s.name;
    }
    EXPECT_EQ(lint_source(s.source), all) << s.name;
  }
}

TEST(LintProperties, DiagnosticLinesWithinSource) {
  for (const auto& s : t::load_snippets(t::fixture_dir() / "differential" / "snippets.txt")) {
    const int lines = static_cast<int>(SourceText(s.source).line_count());
    for (const auto& d : lint_source(s.source)) {
      EXPECT_GE(d.line, 1);
      EXPECT_LE(d.line, lines);
    }
  }
}

TEST(CheckKind, NamesRoundTrip) {
  for (std::size_t k = 0; k < lint::kLintCheckKindCount; ++k) {
    const auto kind = static_cast<LintCheckKind>(k);
    EXPECT_EQ(lint::check_kind_from_name(lint::check_kind_name(kind)), kind);
  }
  EXPECT_FALSE(lint::check_kind_from_name("Bogus").has_value());
}

}  // namespace
