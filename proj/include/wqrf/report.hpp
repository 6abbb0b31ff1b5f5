#pragma once

#include <string>
#include <string_view>

#include "wqrf/eval.hpp"

namespace wqrf {

/// Full-precision JSON: matrix with class order, per-class and weighted
/// metrics, accuracy, correct/incorrect, kappa and agreement.
std::string report_to_json(const EvaluationReport& report);

/// Correctness summary, per-class table, confusion matrix and kappa line.
/// Accuracy percentages carry 4 decimals, per-class metrics 3, kappa 4.
std::string report_to_text(const EvaluationReport& report);

/// Reads {"classes": [...], "counts": [[...], ...]}. Throws
/// Error{MalformedValue} on ragged grids, negative or fractional counts and
/// Error{UnknownLabel} on unknown class names.
ConfusionMatrix parse_matrix_json(std::string_view text);

}  // namespace wqrf
