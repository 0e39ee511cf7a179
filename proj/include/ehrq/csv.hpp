#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ehrq {

/// RFC 4180: double-quoted fields may contain commas, newlines and doubled
/// quotes. Records are rows of raw (undecoded-type) strings.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

std::string csv_field(std::string_view value);
std::string csv_line(const std::vector<std::string>& fields);

}  // namespace ehrq
