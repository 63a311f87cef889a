#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace abx {

/// Shortest decimal text that parses back to the same value.
std::string format_decimal(double value);
std::string format_decimal(float value);

/// Splits on runs of spaces and tabs.
std::vector<std::string_view> split_whitespace(std::string_view line);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view value);

}  // namespace abx
