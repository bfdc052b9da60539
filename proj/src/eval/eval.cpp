// SPDX-License-Identifier: Apache-2.0
#include "complint/eval/eval.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <unordered_map>

namespace complint::eval {

EvalOutput evaluate_all(const std::vector<dataset::Problem>& problems,
                        const std::vector<attribution::CompletionSample>& samples, int jobs,
                        const lint::CheckSet& checks) {
  jobs = std::max(jobs, 1);
  std::unordered_map<std::string, std::size_t> by_id;
  by_id.reserve(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (!by_id.emplace(problems[i].id, i).second) throw EvalError("duplicate problem id " + problems[i].id);
  }

  EvalOutput out;
  out.stats.samples = samples.size();

  // Resolve samples to problems; collect the contexts that are needed.
  std::vector<std::size_t> problem_of(samples.size(), SIZE_MAX);
  std::vector<std::size_t> needed;
  std::vector<int> slot(problems.size(), -1);
  std::set<std::pair<std::string, std::int64_t>> seen;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!seen.emplace(s.problem_id, s.sample_index).second) {
      throw EvalError("duplicate completion (" + s.problem_id + ", " + std::to_string(s.sample_index) + ")");
    }
    const auto it = by_id.find(s.problem_id);
    if (it == by_id.end()) {
      out.orphans.emplace_back(s.problem_id, s.sample_index);
      continue;
    }
    problem_of[i] = it->second;
    if (slot[it->second] < 0) {
      slot[it->second] = static_cast<int>(needed.size());
      needed.push_back(it->second);
    }
  }
  out.stats.orphans = out.orphans.size();

  std::vector<attribution::ContextAnalysis> contexts(needed.size());
  const auto n_ctx = static_cast<long>(needed.size());
  auto analyze_one = [&](long i) {
    const auto& p = problems[needed[static_cast<std::size_t>(i)]];
    contexts[static_cast<std::size_t>(i)] = attribution::analyze_context(SourceText(p.context), checks);
  };

  std::vector<attribution::SampleVerdict> verdicts(samples.size());
  std::vector<char> keep(samples.size(), 0);
  const auto n_samples = static_cast<long>(samples.size());
  auto evaluate_one = [&](long i) {
    const auto idx = static_cast<std::size_t>(i);
    if (problem_of[idx] == SIZE_MAX) return;
    const auto& s = samples[idx];
    const auto& ctx = contexts[static_cast<std::size_t>(slot[problem_of[idx]])];
    try {
      auto v = attribution::evaluate_with_context(ctx, s.completion, checks);
      v.problem_id = s.problem_id;
      v.sample_index = s.sample_index;
      verdicts[idx] = std::move(v);
      keep[idx] = 1;
    } catch (const attribution::EncodingError&) {
      keep[idx] = 0;
    }
  };

  if (jobs > 1) {
#pragma omp parallel num_threads(jobs)
    {
#pragma omp for schedule(dynamic, 8)
      for (long i = 0; i < n_ctx; ++i) analyze_one(i);
#pragma omp for schedule(dynamic, 16)
      for (long i = 0; i < n_samples; ++i) evaluate_one(i);
    }
  } else {
    for (long i = 0; i < n_ctx; ++i) analyze_one(i);
    for (long i = 0; i < n_samples; ++i) evaluate_one(i);
  }

  out.verdicts.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (keep[i] != 0) {
      out.verdicts.push_back(std::move(verdicts[i]));
    } else if (problem_of[i] != SIZE_MAX) {
      ++out.stats.invalid_utf8;
    }
  }
  std::sort(out.verdicts.begin(), out.verdicts.end(), [](const auto& a, const auto& b) {
    return std::tie(a.problem_id, a.sample_index) < std::tie(b.problem_id, b.sample_index);
  });
  out.stats.verdicts = out.verdicts.size();
  return out;
}

}  // namespace complint::eval
