#include "crpower/csv.hpp"

#include <cmath>
#include <cstdio>

namespace crpower {

std::string format_number(double x, int digits) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[64];
    if (std::fabs(x) < 1e-3) {
        std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
    } else {
        std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    }
    return buf;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (k) out << ',';
        out << fields[k];
    }
    out << '\n';
}

}  // namespace crpower
