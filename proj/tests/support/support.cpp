// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "complint/lint/lint.hpp"
#include "complint/pyast/parser.hpp"

#ifndef COMPLINT_FIXTURE_DIR
#error "COMPLINT_FIXTURE_DIR must be defined"
#endif

namespace complint::testing {

namespace fs = std::filesystem;
using attribution::Outcome;
using lint::LintCheckKind;
using pyast::AstErrorCategory;

fs::path fixture_dir() { return fs::path(COMPLINT_FIXTURE_DIR); }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

fs::path make_temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  for (;;) {
    const fs::path p = fs::temp_directory_path() / ("complint-" + tag + "-" + std::to_string(rng() % 1000000000));
    if (fs::create_directories(p)) return p;
  }
}

std::vector<Snippet> load_snippets(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::vector<Snippet> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("### ", 0) == 0) {
      out.push_back({line.substr(4), {}});
    } else if (!out.empty()) {
      out.back().source += line + "\n";
    }
  }
  return out;
}

std::vector<RefEntry> load_reference(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::vector<RefEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    RefEntry e{j.at("name").get<std::string>(), {}};
    for (const auto& d : j.at("diagnostics")) {
      e.diagnostics.push_back({d.at("kind").get<std::string>(), d.at("symbol").get<std::string>(), d.at("line").get<int>()});
    }
    std::sort(e.diagnostics.begin(), e.diagnostics.end());
    out.push_back(std::move(e));
  }
  return out;
}

std::string reference_symbol(const lint::Diagnostic& d) {
  if (d.kind == LintCheckKind::FStringMissingPlaceholders) return {};
  if (d.kind == LintCheckKind::UnusedImport) {
    const auto first = d.message.find('\'');
    const auto last = d.message.rfind('\'');
    if (first != std::string::npos && last > first) return d.message.substr(first + 1, last - first - 1);
  }
  return d.symbol;
}

std::optional<std::vector<RefDiag>> lint_as_reference(const std::string& source) {
  const SourceText src(source);
  const auto parsed = pyast::parse_module(src);
  if (!parsed.ok()) return std::nullopt;
  std::vector<RefDiag> out;
  for (const auto& d : lint::analyze(parsed.ast(), src, lint::all_checks())) {
    out.push_back({std::string(lint::check_kind_name(d.kind)), reference_symbol(d), d.line});
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<GoldenCase>& golden_cases() {
  static const std::vector<GoldenCase> cases = {
      {"01_unexpected_eof.py", 18, Outcome::AstError, AstErrorCategory::UnexpectedEof, {}, "", 31, {}},
      {"02_invalid_syntax.py", 22, Outcome::AstError, AstErrorCategory::InvalidSyntax, {}, "", 23, {}},
      {"03_print_missing_parens.py", 3, Outcome::AstError, AstErrorCategory::PrintMissingParentheses, {}, "", 6, {}},
      {"04_keyword_repeated.py", 13, Outcome::AstError, AstErrorCategory::KeywordArgumentRepeated, {}, "", 15, {}},
      {"05_undefined_name.py", 15, Outcome::Lint, {}, LintCheckKind::UndefinedName, "factorial", 18,
       lint::NameKind::Function},
      {"06_unused_variable.py", 12, Outcome::Lint, {}, LintCheckKind::UnusedVariable, "encoding_check", 15, {}},
      {"07_fstring_placeholders.py", 14, Outcome::Lint, {}, LintCheckKind::FStringMissingPlaceholders, "", 15, {}},
      {"08_unused_import.py", 15, Outcome::Lint, {}, LintCheckKind::UnusedImport, "urllib.parse", 17, {}},
      {"09_redefined_unused.py", 5, Outcome::Lint, {}, LintCheckKind::RedefinedWhileUnused, "dsl", 6, {}},
      {"10_undefined_local.py", 15, Outcome::Lint, {}, LintCheckKind::UndefinedLocal, "cnt", 18, {}},
  };
  return cases;
}

std::pair<std::string, std::string> split_after_line(const std::string& text, int n) {
  std::size_t pos = 0;
  for (int i = 0; i < n && pos < text.size(); ++i) {
    const auto nl = text.find('\n', pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
  }
  return {text.substr(0, pos), text.substr(pos)};
}

// ---------------------------------------------------------------------------

namespace {

template <typename T, std::size_t N>
const T& pick(std::mt19937_64& rng, const std::array<T, N>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

bool chance(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

constexpr std::array<const char*, 10> kImports = {
    "import os\n",          "import sys\n",         "import json\n",
    "import re\n",          "import math\n",        "from collections import defaultdict\n",
    "import urllib.parse\n", "from typing import List, Optional\n", "import logging\n",
    "from pathlib import Path\n",
};

constexpr std::array<const char*, 8> kNames = {"load", "parse", "scale", "merge", "render", "count", "lookup", "flush"};

std::string helper_function(std::mt19937_64& rng, const std::string& name) {
  std::ostringstream s;
  s << "def " << name << "(data, limit=10):\n";
  s << "    \"\"\"Helper " << name << ".\"\"\"\n";
  s << "    result = []\n";
  s << "    for index, item in enumerate(data):\n";
  s << "        if index >= limit:\n";
  s << "            break\n";
  if (chance(rng, 0.15)) s << "        unused_" << name << " = item\n";
  s << "        result.append(item)\n";
  if (chance(rng, 0.1)) s << "    print(f\"done\")\n";
  if (chance(rng, 0.1)) s << "    log(missing_" << name << ")\n";
  s << "    return result\n\n\n";
  return s.str();
}

std::string synthetic_context(std::mt19937_64& rng, const std::string& target) {
  std::ostringstream s;
  s << "\"\"\"Synthetic module " << target << ".\"\"\"\n";
  const int imports = 3 + static_cast<int>(rng() % 3);
  for (int i = 0; i < imports; ++i) s << pick(rng, kImports);
  s << "\nLIMIT = " << (rng() % 100) << "\n\n\n";
  for (int i = 0; i < 2; ++i) s << helper_function(rng, std::string(pick(rng, kNames)) + std::to_string(i));
  s << "class Store:\n";
  s << "    \"\"\"Key value store.\"\"\"\n\n";
  s << "    def __init__(self, items):\n";
  s << "        self.items = dict(items)\n\n";
  s << "    def get(self, key, default=None):\n";
  s << "        return self.items.get(key, default)\n\n\n";
  if (chance(rng, 0.01)) s << "def broken(:\n    pass\n\n\n";
  s << "def " << target << "(values, store, threshold=LIMIT):\n";
  s << "    \"\"\"Process values using the store.\n\n";
  s << "    Returns a list of accepted entries.\n";
  s << "    \"\"\"\n";
  return s.str();
}

constexpr std::array<const char*, 12> kBodyLines = {
    "total = 0",
    "for value in values:",
    "    key = str(value)",
    "    entry = store.get(key)",
    "    if entry is None:",
    "        continue",
    "    total += len(entry)",
    "accepted = [v for v in values if v > threshold]",
    "mapping = {k: v for k, v in zip(values, accepted)}",
    "text = ', '.join(str(v) for v in accepted)",
    "if total > threshold:",
    "    accepted.append(total)",
};

std::string synthetic_completion(std::mt19937_64& rng) {
  std::ostringstream s;
  for (const char* line : kBodyLines) s << "    " << line << "\n";
  const auto mode = rng() % 10;
  switch (mode) {
    case 0: s << "    return normalize(accepted)\n"; break;
    case 1: s << "    unused_total = total\n    return accepted\n"; break;
    case 2: s << "    print(f\"finished\")\n    return accepted\n"; break;
    case 3: s << "    return sorted(accepted, key=lambda v: (v, text, mapping.get(v)\n"; break;
    case 4: s << "    print \"done\"\n    return accepted\n"; break;
    case 5: s << "    report(values, key=1, key=2)\n    return accepted\n"; break;
    default: s << "    logging.info(text)\n    return accepted, mapping\n"; break;
  }
  return s.str();
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(std::size_t samples, std::size_t per_problem, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SyntheticCorpus c;
  const std::size_t problems = (samples + per_problem - 1) / per_problem;
  for (std::size_t p = 0; p < problems; ++p) {
    dataset::Problem prob;
    char id[32];
    std::snprintf(id, sizeof id, "syn%07zu", p);
    prob.id = id;
    prob.path = "synthetic/" + prob.id + ".py";
    prob.context = synthetic_context(rng, "process_" + std::to_string(p));
    prob.groundtruth = "    return values\n";
    c.problems.push_back(std::move(prob));
  }
  for (std::size_t i = 0; i < samples; ++i) {
    attribution::CompletionSample s;
    s.problem_id = c.problems[i / per_problem].id;
    s.sample_index = static_cast<std::int64_t>(i % per_problem);
    s.completion = synthetic_completion(rng);
    c.samples.push_back(std::move(s));
  }
  return c;
}

namespace {

constexpr std::array<const char*, 16> kContextFragments = {
    "import os\n",
    "import sys\n",
    "from typing import List\n",
    "import urllib.parse\n",
    "x = 1\n",
    "print(foo)\n",
    "def helper():\n    tmp = 1\n    return bar\n",
    "class Box:\n    size = 3\n    def area(self):\n        return size\n",
    "name = f\"static\"\n",
    "def dup():\n    pass\n",
    "def dup():\n    pass\n",
    "total = 0\ndef bump():\n    total += 1\n",
    "values = [v for v in range(3)]\n",
    "try:\n    import json\nexcept ImportError:\n    json = None\n",
    "def outer():\n    cnt = 0\n    def inner():\n        print(cnt)\n        cnt = 1\n    return inner\n",
    "from os import *\n",
};

constexpr std::array<const char*, 18> kCompletionFragments = {
    "    return foo\n",
    "    y = 2\n",
    "    print(f\"done\")\n",
    "    import os\n",
    "    return os.sep\n",
    "    return x + a\n",
    "    value = bar(a)\n    return value\n",
    "    for i in range(a):\n        print(i)\n",
    "    import sys\n    import sys\n",
    "    print(a)\n    a = 2\n",
    "    return helper()\n",
    "    total = total + 1\n",
    "    data = json.dumps(a)\n",
    "    return [q for q in missing]\n",
    "    return (a\n",
    "    print \"x\"\n",
    "    call(k=1, k=2)\n",
    "    pass\n",
};

}  // namespace

std::pair<std::string, std::string> random_fragment_pair(std::mt19937_64& rng) {
  std::string ctx;
  const int nctx = static_cast<int>(rng() % 6);
  for (int i = 0; i < nctx; ++i) ctx += pick(rng, kContextFragments);
  ctx += "def target(a, b):\n    \"\"\"Doc.\"\"\"\n";
  std::string comp;
  const int ncomp = 1 + static_cast<int>(rng() % 5);
  for (int i = 0; i < ncomp; ++i) comp += pick(rng, kCompletionFragments);
  return {ctx, comp};
}

attribution::SampleVerdict random_verdict(std::mt19937_64& rng, std::size_t index) {
  attribution::SampleVerdict v;
  v.problem_id = "p" + std::to_string(index / 7);
  v.sample_index = static_cast<std::int64_t>(index % 7);
  const auto r = rng() % 100;
  if (r < 3) {
    v.outcome = Outcome::ContextUnparsable;
    return v;
  }
  if (r < 25) {
    v.outcome = Outcome::AstError;
    pyast::SyntaxErrorReport e;
    e.category = static_cast<AstErrorCategory>(rng() % pyast::kAstErrorCategoryCount);
    e.is_eof = pyast::is_eof_category(e.category);
    e.line = 1 + static_cast<int>(rng() % 50);
    v.ast_error = e;
    return v;
  }
  v.outcome = Outcome::Lint;
  const int n = static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) {
    lint::Diagnostic d;
    d.kind = static_cast<LintCheckKind>(rng() % lint::kLintCheckKindCount);
    d.symbol = "s" + std::to_string(rng() % 5);
    d.line = 1 + static_cast<int>(rng() % 60);
    if (d.kind == LintCheckKind::UndefinedName) {
      if (rng() % 2) {
        ++v.undefined_functions;
      } else {
        ++v.undefined_variables;
      }
    }
    v.attributed.push_back(d);
  }
  for (std::size_t k = 0; k < lint::kLintCheckKindCount; ++k) {
    if (rng() % 4 == 0) v.context_error_kinds.insert(static_cast<LintCheckKind>(k));
  }
  return v;
}

void write_fixture_tree(const fs::path& root, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const fs::path rel = fs::path(i % 3 == 0 ? "pkg" : i % 3 == 1 ? "pkg/sub" : "lib") / ("m" + std::to_string(i) + ".py");
    std::string text;
    switch (i % 10) {
      case 0: text = "def f(:\n    pass\n"; break;                       // unparsable
      case 1: text = "x = 1\n\ndef g():\n    return x\n"; break;          // no docstring
      case 2: text = "def tiny():\n    \"\"\"Doc.\"\"\"\n    return 1\n"; break;  // context too short
      default: {
        text = synthetic_context(rng, "fn_" + std::to_string(i));
        text += synthetic_completion(rng);
        if (i % 4 == 0) {
          text += "\n\nclass Extra:\n    def method(self, a):\n        \"\"\"Method doc.\"\"\"\n        return a\n";
        }
        if (i % 7 == 0) text += "\n\ndef crlf():\r\n    \"\"\"Windows newlines.\"\"\"\r\n    return 2\r\n";
        break;
      }
    }
    write_file(root / rel, text);
  }
}

}  // namespace complint::testing
