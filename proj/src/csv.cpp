#include "dropshape/csv.hpp"

#include <cstdio>
#include <ostream>

namespace dropshape {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << csv_field(fields[i]);
    }
    os << "\r\n";
}

}  // namespace dropshape
