#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dropshape {

/// %.12e formatting used for every numeric CSV field.
std::string format_number(double v);
/// RFC 4180 quoting: fields with commas, quotes or line breaks are wrapped in quotes.
std::string csv_field(const std::string& s);
void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

}  // namespace dropshape
