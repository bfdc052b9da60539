// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "complint/attribution/attribution.hpp"
#include "complint/dataset/dataset.hpp"

namespace complint::io {

inline constexpr int kFormatVersion = 1;

/// Malformed or inconsistent input data. `line` is 1-based, 0 if unknown.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct ProblemsHeader {
  int format_version = kFormatVersion;
  std::string token_counter;
  std::uint64_t seed = 0;
};

struct ProblemsFile {
  std::optional<ProblemsHeader> header;
  std::vector<dataset::Problem> problems;
};

void write_problems(std::ostream& out, const ProblemsHeader& header, const std::vector<dataset::Problem>& problems);
ProblemsFile read_problems(std::istream& in);

/// Completions whose text is not valid UTF-8 are dropped and counted.
struct CompletionsFile {
  std::vector<attribution::CompletionSample> samples;
  std::size_t invalid_utf8 = 0;
};

CompletionsFile read_completions(std::istream& in);
void write_completions(std::ostream& out, const std::vector<attribution::CompletionSample>& samples);

std::string verdict_to_json(const attribution::SampleVerdict& v);
attribution::SampleVerdict verdict_from_json(const std::string& line, std::size_t line_no = 0);

/// Header record followed by one verdict per line.
void write_verdicts(std::ostream& out, const std::vector<attribution::SampleVerdict>& verdicts);
std::vector<attribution::SampleVerdict> read_verdicts(std::istream& in);

}  // namespace complint::io
