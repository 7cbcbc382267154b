#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rubricjudge {

// Minimal RFC 4180 CSV: quoted fields may contain commas, doubled quotes and
// embedded newlines; rows end with \n or \r\n.

std::string csv_escape(std::string_view field);

// Joins and escapes one row, no trailing newline.
std::string csv_row(const std::vector<std::string>& fields);

// Parses a whole document into rows of fields. A trailing newline does not
// produce an empty row.
std::vector<std::vector<std::string>> csv_parse(std::string_view text);

}  // namespace rubricjudge
