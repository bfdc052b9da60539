// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "complint/dataset/dataset.hpp"
#include "complint/io/jsonl.hpp"
#include "complint/pyast/parser.hpp"
#include "support.hpp"

namespace {

using namespace complint;
using dataset::SkipReason;
namespace fs = std::filesystem;
namespace t = complint::testing;

std::vector<dataset::FunctionSpan> candidates(const std::string& text) {
  const SourceText src(text);
  const auto r = pyast::parse_module(src);
  EXPECT_TRUE(r.ok());
  return dataset::enumerate_candidates(r.ast(), src);
}

TEST(TokenCounter, Examples) {
  EXPECT_EQ(dataset::count_tokens_default("x = 1"), 3u);
  EXPECT_EQ(dataset::count_tokens_default(""), 0u);
  EXPECT_EQ(dataset::count_tokens_default("def f(a, b):"), 8u);
  EXPECT_EQ(dataset::count_tokens_default("   \n\t"), 0u);
  EXPECT_EQ(dataset::count_tokens_default("caf\xc3\xa9_1"), 1u);
}

TEST(TokenCounter, AdditiveOrGreaterWithSeparator) {
  const auto snippets = t::load_snippets(t::fixture_dir() / "differential" / "snippets.txt");
  for (std::size_t i = 0; i + 1 < snippets.size(); ++i) {
    const auto& a = snippets[i].source;
    const auto& b = snippets[i + 1].source;
    EXPECT_GE(dataset::count_tokens_default(a + "\n" + b),
              dataset::count_tokens_default(a) + dataset::count_tokens_default(b));
  }
}

TEST(Candidates, OnlyDocstringedFunctions) {
  const auto c = candidates("def a():\n    \"doc\"\n    return 1\n\ndef b():\n    pass\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].name, "a");
}

TEST(Candidates, MethodsInDocumentOrder) {
  const auto c = candidates(
      "class K:\n    def m1(self):\n        \"\"\"One.\"\"\"\n\n    def m2(self):\n        '''Two.'''\n        return 2\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].name, "m1");
  EXPECT_EQ(c[1].name, "m2");
  EXPECT_TRUE(c[0].is_method);
}

TEST(Candidates, AsyncAndNested) {
  const auto c = candidates(
      "async def outer():\n    \"\"\"Outer.\"\"\"\n    def inner():\n        \"\"\"Inner.\"\"\"\n    return inner\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_TRUE(c[0].is_async);
  EXPECT_FALSE(c[1].is_async);
  EXPECT_TRUE(c[1].is_nested);
}

TEST(Candidates, DocstringIsFirstStatement) {
  const auto c = candidates("def f():\n    x = 1\n    \"\"\"Not a docstring.\"\"\"\n");
  EXPECT_TRUE(c.empty());
}

std::string long_preamble() {
  std::string s = "\"\"\"Module.\"\"\"\nimport os\n\n";
  for (int i = 0; i < 20; ++i) s += "VALUE_" + std::to_string(i) + " = os.sep + str(" + std::to_string(i) + ")\n";
  return s + "\n";
}

TEST(Extract, SingleCandidatePrefixes) {
  const std::string text = long_preamble() +
                           "def target(a, b):\n    \"\"\"Add.\n\n    Returns a sum.\n    \"\"\"\n    total = a + b\n"
                           "    return total\n\n\nafter = 1\n";
  const auto r = dataset::extract_problem(SourceText(text), "a/b.py", 1, dataset::default_token_counter());
  ASSERT_TRUE(std::holds_alternative<dataset::Problem>(r));
  const auto& p = std::get<dataset::Problem>(r);
  EXPECT_EQ(text.rfind(p.context, 0), 0u);
  EXPECT_EQ(text.rfind(p.context + p.groundtruth, 0), 0u);
  EXPECT_TRUE(p.context.ends_with("    \"\"\"\n"));
  EXPECT_EQ(p.groundtruth, "    total = a + b\n    return total\n");
  EXPECT_EQ(p.path, "a/b.py");
  EXPECT_EQ(p.id.size(), 16u);
}

TEST(Extract, GroundtruthEndsWithBlockNotFollowingLine) {
  const std::string text = long_preamble() +
                           "def target(a):\n    \"\"\"Loop.\"\"\"\n    for x in a:\n        print(x)\nAFTER = 2\n";
  const auto r = dataset::extract_problem(SourceText(text), "p.py", 1, dataset::default_token_counter());
  ASSERT_TRUE(std::holds_alternative<dataset::Problem>(r));
  EXPECT_EQ(std::get<dataset::Problem>(r).groundtruth, "    for x in a:\n        print(x)\n");
}

TEST(Extract, CrlfLinesKeepTerminators) {
  std::string pre = long_preamble();
  std::string text;
  for (char ch : pre) text += ch == '\n' ? std::string("\r\n") : std::string(1, ch);
  text += "def f():\r\n    \"\"\"Doc.\"\"\"\r\n    return 1\r\n";
  const auto r = dataset::extract_problem(SourceText(text), "w.py", 3, dataset::default_token_counter());
  ASSERT_TRUE(std::holds_alternative<dataset::Problem>(r));
  const auto& p = std::get<dataset::Problem>(r);
  EXPECT_TRUE(p.context.ends_with("\"\"\"Doc.\"\"\"\r\n"));
  EXPECT_EQ(p.groundtruth, "    return 1\r\n");
}

TEST(Extract, SkipReasons) {
  const auto& counter = dataset::default_token_counter();
  auto reason = [&](const std::string& text, const dataset::ExtractOptions& o = {}) {
    const auto r = dataset::extract_problem(SourceText(text), "x.py", 0, counter, o);
    return std::holds_alternative<SkipReason>(r) ? std::optional(std::get<SkipReason>(r)) : std::nullopt;
  };
  EXPECT_EQ(reason("def f(:\n"), SkipReason::Unparsable);
  EXPECT_EQ(reason("def f():\n    return 1\n"), SkipReason::NoDocstringFunction);
  EXPECT_EQ(reason("def f():\n    \"\"\"D.\"\"\"\n    return 1\n"), SkipReason::ContextTooShort);
  const std::string ok = long_preamble() + "def f():\n    \"\"\"D.\"\"\"\n    return 1\n";
  dataset::ExtractOptions tight;
  tight.max_context_tokens = 70;
  EXPECT_EQ(reason(ok, tight), SkipReason::ContextTooLong);
  dataset::ExtractOptions short_gt;
  short_gt.max_groundtruth_tokens = 2;
  EXPECT_EQ(reason(ok, short_gt), SkipReason::GroundtruthTooLong);
  EXPECT_EQ(reason("x = '\xff'\n"), SkipReason::NotUtf8);
  dataset::ExtractOptions tiny;
  tiny.max_file_bytes = 10;
  EXPECT_EQ(reason(ok, tiny), SkipReason::TooLarge);
  EXPECT_FALSE(reason(ok).has_value());
}

TEST(Extract, TopLevelOnlySkipsMethods) {
  const std::string text =
      long_preamble() + "class K:\n    def m(self):\n        \"\"\"Method.\"\"\"\n        return 1\n";
  dataset::ExtractOptions o;
  o.include_nested = false;
  const auto r = dataset::extract_problem(SourceText(text), "k.py", 0, dataset::default_token_counter(), o);
  ASSERT_TRUE(std::holds_alternative<SkipReason>(r));
  EXPECT_EQ(std::get<SkipReason>(r), SkipReason::NoDocstringFunction);
  EXPECT_TRUE(std::holds_alternative<dataset::Problem>(
      dataset::extract_problem(SourceText(text), "k.py", 0, dataset::default_token_counter())));
}

TEST(Extract, DeterministicPerSeedAndPath) {
  std::string text = long_preamble();
  for (int i = 0; i < 8; ++i) {
    text += "def f" + std::to_string(i) + "():\n    \"\"\"Doc " + std::to_string(i) + ".\"\"\"\n    return " +
            std::to_string(i) + "\n\n";
  }
  const auto& counter = dataset::default_token_counter();
  std::set<std::string> picked;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto a = dataset::extract_problem(SourceText(text), "m.py", seed, counter);
    const auto b = dataset::extract_problem(SourceText(text), "m.py", seed, counter);
    ASSERT_EQ(a, b);
    if (const auto* p = std::get_if<dataset::Problem>(&a)) picked.insert(p->groundtruth);
  }
  EXPECT_GT(picked.size(), 3u);  // different seeds reach different functions
}

TEST(Extract, DocstringAnchoring) {
  const auto root = t::make_temp_dir("anchor");
  t::write_fixture_tree(root, 30, 17);
  const auto out = dataset::extract_tree(root, 9, dataset::default_token_counter());
  ASSERT_FALSE(out.problems.empty());
  for (const auto& p : out.problems) {
    auto ctx = p.context;
    while (!ctx.empty() && (ctx.back() == '\n' || ctx.back() == '\r' || ctx.back() == ' ')) ctx.pop_back();
    const auto last_line = ctx.substr(ctx.find_last_of('\n') + 1);
    EXPECT_TRUE(last_line.find("\"\"\"") != std::string::npos || last_line.find("'''") != std::string::npos)
        << p.path << ": " << last_line;
  }
  fs::remove_all(root);
}

TEST(Tree, EmptyDirectory) {
  const auto root = t::make_temp_dir("empty");
  const auto out = dataset::extract_tree(root, 1, dataset::default_token_counter());
  EXPECT_TRUE(out.problems.empty());
  EXPECT_EQ(out.stats.files, 0u);
  fs::remove_all(root);
}

TEST(Tree, StatsReconcileAndOrderIndependentOfJobs) {
  const auto root = t::make_temp_dir("stats");
  t::write_fixture_tree(root, 40, 2);
  t::write_file(root / "zz_bad.py", "x = '\xff'\n");
  const auto serial = dataset::extract_tree(root, 77, dataset::default_token_counter(), {}, 1);
  const auto par = dataset::extract_tree(root, 77, dataset::default_token_counter(), {}, 3);
  EXPECT_EQ(serial.problems, par.problems);
  std::size_t skipped = 0;
  for (auto n : serial.stats.skipped) skipped += n;
  EXPECT_EQ(serial.stats.files, 41u);
  EXPECT_EQ(serial.stats.problems + skipped, serial.stats.files);
  EXPECT_EQ(serial.stats.skipped[static_cast<std::size_t>(SkipReason::NotUtf8)], 1u);
  EXPECT_TRUE(std::is_sorted(serial.problems.begin(), serial.problems.end(),
                             [](const auto& a, const auto& b) { return a.path < b.path; }));
  fs::remove_all(root);
}

TEST(Tree, ListsOnlyPythonFilesSorted) {
  const auto root = t::make_temp_dir("list");
  t::write_file(root / "b.py", "");
  t::write_file(root / "a/z.py", "");
  t::write_file(root / "a/notes.txt", "");
  const auto files = dataset::list_python_files(root);
  EXPECT_EQ(files, (std::vector<std::string>{"a/z.py", "b.py"}));
  fs::remove_all(root);
}

}  // namespace
