#pragma once

// JSON records of statistical results:
//   {method, statistic, df, p, effect, groups|pair, notes}
// Non-finite numbers serialize as null.

#include <string>
#include <vector>

#include "aviary/stats/tests.hpp"
#include "json.hpp"

namespace aviary::stats {

nlohmann::ordered_json finite_or_null(double v);

nlohmann::ordered_json to_json(const TestResult& r, const std::vector<std::string>& groups = {});
nlohmann::ordered_json to_json(const AnovaResult& r, const std::vector<std::string>& groups = {});
nlohmann::ordered_json to_json(const std::vector<TukeyComparison>& comparisons);

}  // namespace aviary::stats
