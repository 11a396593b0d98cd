#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace kinodiff::csv {

// Splits one CSV line on `delim`. Double-quoted fields may contain the
// delimiter; embedded quotes are written as "".
std::vector<std::string> split_line(std::string_view line, char delim = ',');

// Quotes a field only when it contains the delimiter, a quote or a newline.
std::string escape(std::string_view field, char delim = ',');

// Reads one line, stripping a trailing '\r'. Returns false at EOF.
bool read_line(std::istream& in, std::string& line);

std::string trim(std::string_view s);

}  // namespace kinodiff::csv
