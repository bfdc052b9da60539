// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace complint::acceptance {

struct Result {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Result()> run;
};

const std::vector<Criterion>& criteria();

Result golden_corpus();
Result differential_oracle();
Result trichotomy();
Result diff_contract();
Result edit_similarity();
Result metrics_merge();
Result dataset_invariants();
Result throughput();

}  // namespace complint::acceptance
