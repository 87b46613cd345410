#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ctalab/table.hpp"

namespace ctalab {

// Parses comma-delimited, double-quote-escaped CSV text. The first row is
// a header and is discarded from column values; quoted fields may contain
// commas, quotes ("" escape) and newlines. Throws EmptyTable when no data
// rows remain and RaggedRows on unequal row widths.
Table parse_table(std::string_view csv_text, std::string id);

// Raw row-major CSV parse (header included), shared with parse_table.
std::vector<std::vector<std::string>> parse_csv_rows(std::string_view csv_text);

std::string csv_escape(std::string_view field);
std::string write_csv_rows(const std::vector<std::vector<std::string>>& rows);

}  // namespace ctalab
