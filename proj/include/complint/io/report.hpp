// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>

#include "complint/metrics/metrics.hpp"

namespace complint::io {

/// Free-form run metadata embedded in reports (input paths, tool version).
using RunMetadata = std::map<std::string, std::string>;

std::string report_to_json(const metrics::EvalReport& report, const std::optional<metrics::ConditionalReport>& cond,
                           const RunMetadata& run);

/// One row per error type; conditional columns are empty when absent.
std::string report_to_csv(const metrics::EvalReport& report, const std::optional<metrics::ConditionalReport>& cond,
                          const RunMetadata& run);

}  // namespace complint::io
