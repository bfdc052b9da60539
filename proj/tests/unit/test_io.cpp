// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <json.hpp>

#include "complint/eval/eval.hpp"
#include "complint/io/jsonl.hpp"
#include "complint/io/report.hpp"
#include "complint/metrics/metrics.hpp"
#include "support.hpp"

namespace {

using namespace complint;
namespace t = complint::testing;

TEST(Problems, RoundTripWithHeader) {
  dataset::Problem p{"00ff", "a/b.py", "def f():\n    \"\"\"D\u00e9.\"\"\"\n", "    return 1\n", 70, 3};
  std::ostringstream out;
  io::write_problems(out, {io::kFormatVersion, "word-punct-v1", 42}, {p});
  const auto text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), R"({"format_version":1,"token_counter":"word-punct-v1","seed":42})");
  std::istringstream in(text);
  const auto back = io::read_problems(in);
  ASSERT_TRUE(back.header.has_value());
  EXPECT_EQ(back.header->seed, 42u);
  ASSERT_EQ(back.problems.size(), 1u);
  EXPECT_EQ(back.problems[0], p);
}

TEST(Completions, MalformedLineReportsLineNumber) {
  std::istringstream in("{\"problem_id\":\"a\",\"sample_index\":0,\"completion\":\"x\"}\n{not json\n");
  try {
    io::read_completions(in);
    FAIL() << "expected DataError";
  } catch (const io::DataError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Completions, InvalidUtf8IsCountedAndSkipped) {
  std::istringstream in(
      "{\"problem_id\":\"a\",\"sample_index\":0,\"completion\":\"ok\"}\n"
      "{\"problem_id\":\"a\",\"sample_index\":1,\"completion\":\"\xff\"}\n");
  const auto c = io::read_completions(in);
  EXPECT_EQ(c.samples.size(), 1u);
  EXPECT_EQ(c.invalid_utf8, 1u);
}

TEST(Verdicts, RoundTripRandom) {
  std::mt19937_64 rng(4);
  std::vector<attribution::SampleVerdict> vs;
  for (std::size_t i = 0; i < 500; ++i) {
    auto v = t::random_verdict(rng, i);
    for (auto& d : v.attributed) d.message = "m " + d.symbol;
    vs.push_back(v);
  }
  std::ostringstream out;
  io::write_verdicts(out, vs);
  std::istringstream in(out.str());
  EXPECT_EQ(io::read_verdicts(in), vs);
}

TEST(Verdicts, SchemaFields) {
  const auto v = attribution::evaluate_sample(SourceText("def f():\n    \"\"\"D.\"\"\"\n"), "    return g(x)\n");
  auto copy = v;
  copy.problem_id = "p1";
  copy.sample_index = 3;
  const auto j = nlohmann::json::parse(io::verdict_to_json(copy));
  EXPECT_EQ(j.at("problem_id"), "p1");
  EXPECT_EQ(j.at("sample"), 3);
  EXPECT_EQ(j.at("outcome"), "lint");
  EXPECT_EQ(j.at("diagnostics").size(), 2u);
  EXPECT_EQ(j.at("undefined_kinds").at("function"), 1);
  EXPECT_EQ(j.at("undefined_kinds").at("variable"), 1);
}

TEST(Report, JsonCarriesDefinitionAndNulls) {
  attribution::SampleVerdict v;
  v.problem_id = "p";
  v.outcome = attribution::Outcome::ContextUnparsable;
  const auto rep = metrics::aggregate({v});
  const auto j = nlohmann::json::parse(io::report_to_json(rep, std::nullopt, {{"tool", "test"}}));
  EXPECT_EQ(j.at("format_version"), 1);
  EXPECT_EQ(j.dump().find("char-levenshtein-v1") != std::string::npos, true);
  EXPECT_EQ(j.at("total_samples"), 1);
  EXPECT_EQ(j.at("discarded_context_unparsable"), 1);
  EXPECT_TRUE(j.at("ast").at("total_rate").is_null());
}

TEST(Report, RatesRoundedToThreeDecimals) {
  std::vector<attribution::SampleVerdict> vs;
  for (int i = 0; i < 3; ++i) {
    attribution::SampleVerdict v;
    v.problem_id = "p";
    v.sample_index = i;
    v.outcome = i == 0 ? attribution::Outcome::AstError : attribution::Outcome::Lint;
    if (i == 0) v.ast_error = pyast::SyntaxErrorReport{pyast::AstErrorCategory::UnexpectedEof, true, 1, 0, ""};
    vs.push_back(v);
  }
  const auto rep = metrics::aggregate(vs);
  const auto j = nlohmann::json::parse(io::report_to_json(rep, std::nullopt, {}));
  EXPECT_DOUBLE_EQ(j.at("ast").at("total_rate").get<double>(), 33.333);
  const auto csv = io::report_to_csv(rep, std::nullopt, {});
  EXPECT_NE(csv.find("33.333"), std::string::npos);
}

TEST(Eval, OrphansSkippedAndCounted) {
  const auto corpus = t::make_synthetic_corpus(20, 10, 1);
  auto samples = corpus.samples;
  attribution::CompletionSample orphan;
  orphan.problem_id = "missing";
  orphan.completion = "    pass\n";
  samples.push_back(orphan);
  const auto out = eval::evaluate_all(corpus.problems, samples, 1);
  EXPECT_EQ(out.verdicts.size(), 20u);
  EXPECT_EQ(out.stats.orphans, 1u);
  ASSERT_EQ(out.orphans.size(), 1u);
  EXPECT_EQ(out.orphans[0].first, "missing");
}

TEST(Eval, DuplicateSampleKeyIsAnError) {
  const auto corpus = t::make_synthetic_corpus(2, 2, 1);
  auto samples = corpus.samples;
  samples.push_back(samples.front());
  EXPECT_THROW(eval::evaluate_all(corpus.problems, samples, 1), eval::EvalError);
}

TEST(Eval, ParallelMatchesSerial) {
  const auto corpus = t::make_synthetic_corpus(300, 7, 12);
  const auto a = eval::evaluate_all(corpus.problems, corpus.samples, 1);
  const auto b = eval::evaluate_all(corpus.problems, corpus.samples, 4);
  EXPECT_EQ(a.verdicts, b.verdicts);
  std::set<attribution::Outcome> outcomes;
  for (const auto& v : a.verdicts) outcomes.insert(v.outcome);
  EXPECT_GE(outcomes.size(), 2u);
  EXPECT_TRUE(std::is_sorted(a.verdicts.begin(), a.verdicts.end(), [](const auto& x, const auto& y) {
    return std::tie(x.problem_id, x.sample_index) < std::tie(y.problem_id, y.sample_index);
  }));
}

TEST(Eval, MatchesPerSampleEvaluation) {
  const auto corpus = t::make_synthetic_corpus(60, 6, 21);
  const auto out = eval::evaluate_all(corpus.problems, corpus.samples, 1);
  std::map<std::string, const dataset::Problem*> by_id;
  for (const auto& p : corpus.problems) by_id[p.id] = &p;
  for (const auto& v : out.verdicts) {
    const auto& s = *std::find_if(corpus.samples.begin(), corpus.samples.end(), [&](const auto& c) {
      return c.problem_id == v.problem_id && c.sample_index == v.sample_index;
    });
    auto direct = attribution::evaluate_sample(SourceText(by_id[v.problem_id]->context), s.completion);
    direct.problem_id = v.problem_id;
    direct.sample_index = v.sample_index;
    EXPECT_EQ(direct, v);
  }
}

}  // namespace
