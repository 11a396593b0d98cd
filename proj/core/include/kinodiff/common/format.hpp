#pragma once

#include <string>

namespace kinodiff {

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

// Strict parse of a whole string as a double; throws InputError.
double parse_double(const std::string& text);

}  // namespace kinodiff
