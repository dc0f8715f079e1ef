#pragma once

#include <string>

#include <json.hpp>

#include "mlgeom/tucker.hpp"

namespace mlgeom {

/// {"samples":[{index, shape, rank, status, param_count, gram_min_eig, curvature_ratio,
/// off_structure_max}, ...], "summary":{pass, max_ratio, samples, evaluated, rank_failures, tol}}
nlohmann::json minimality_report_json(const MinimalityReport& report);

/// One row per sample, same fields as the JSON samples.
std::string minimality_report_csv(const MinimalityReport& report);

} // namespace mlgeom
