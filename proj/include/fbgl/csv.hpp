#ifndef FBGL_CSV_HPP
#define FBGL_CSV_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fbgl::csv {

// %.17g formatting; parses back to the identical double.
std::string format_number(double value);

// Parses a whole field as a double; ParseError(line) on failure.
double parse_number(std::string_view field, std::size_t line);

std::vector<std::string_view> split(std::string_view row, char delim = ',');

std::string join(const std::vector<std::string>& fields, char delim = ',');

}  // namespace fbgl::csv

#endif  // FBGL_CSV_HPP
