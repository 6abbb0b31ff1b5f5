#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "wqrf/data.hpp"

namespace wqrf {

// Header: date,do_mg_l,ph,bod_mg_l,tss_mg_l,pollution_level in any order.
// date and pollution_level are optional; unknown columns are rejected.

/// Reads a comma-separated table with a header row. Row numbers in error
/// messages count data rows from 1. With require_label false a file without a
/// pollution_level column yields an unlabeled dataset.
Dataset parse_csv(std::istream& in, bool require_label);
Dataset parse_csv_text(std::string_view text, bool require_label);
Dataset read_csv_file(const std::string& path, bool require_label);

/// Shortest representation that parses back to the same double.
std::string format_number(double value);

/// Splits one CSV record, honoring double-quoted fields.
std::vector<std::string> split_csv_record(std::string_view line);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

/// Writes the canonical header and one row per sample. The date column is
/// emitted when any sample carries a date, the label column when labeled.
void write_csv(std::ostream& out, const Dataset& dataset);

}  // namespace wqrf
