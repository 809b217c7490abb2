#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace crpower {

/// Decimal point '.', scientific notation for 0 < |x| < 1e-3, "nan"/"inf"
/// for non-finite values. `digits` significant digits.
std::string format_number(double x, int digits = 12);

/// Writes one CSV row terminated by '\n'. Fields are written verbatim; the
/// caller guarantees they contain no separators.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace crpower
