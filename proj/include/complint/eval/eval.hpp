// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "complint/attribution/attribution.hpp"
#include "complint/dataset/dataset.hpp"
#include "complint/lint/lint.hpp"

namespace complint::eval {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalStats {
  std::size_t samples = 0;
  std::size_t verdicts = 0;
  std::size_t orphans = 0;       // completion for an unknown problem id
  std::size_t invalid_utf8 = 0;  // completion text rejected at evaluation
};

struct EvalOutput {
  std::vector<attribution::SampleVerdict> verdicts;  // sorted by (problem_id, sample)
  std::vector<std::pair<std::string, std::int64_t>> orphans;
  EvalStats stats;
};

/// Evaluates every completion against its problem's context. jobs == 1 runs
/// the serial reference loop; jobs > 1 fans out with OpenMP. The verdicts do
/// not depend on `jobs`. Throws EvalError on duplicate problem ids or
/// duplicate (problem_id, sample) keys.
EvalOutput evaluate_all(const std::vector<dataset::Problem>& problems,
                        const std::vector<attribution::CompletionSample>& samples, int jobs,
                        const lint::CheckSet& checks = lint::all_checks());

}  // namespace complint::eval
