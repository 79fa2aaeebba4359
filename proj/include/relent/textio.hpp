#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace relent::textio {

// Shortest decimal that parses back to the same double; "inf"/"-inf"/"nan"
// for non-finite values.
std::string format_double(double value);

// Parses the whole of `text` as a double, accepting "inf". Returns nullopt on
// any trailing garbage.
std::optional<double> parse_double(std::string_view text);

// Splits "0.5,0.3,0.2" into doubles. Throws ValidationError on bad entries.
std::vector<double> parse_csv_doubles(std::string_view text);

std::string_view trim(std::string_view text);

// Drops everything from the first '#'.
std::string_view strip_comment(std::string_view line);

}  // namespace relent::textio
