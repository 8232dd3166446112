#pragma once

#include <compare>
#include <string>

namespace polymodel {

/// Calendar month, the panel's time index. Total order; arithmetic is in
/// whole months via the serial encoding year*12 + (month-1).
struct MonthIndex {
    int year = 0;
    int month = 1; // 1..12

    int serial() const { return year * 12 + (month - 1); }

    static MonthIndex from_serial(int s) {
        MonthIndex m;
        m.year = s >= 0 ? s / 12 : (s - 11) / 12;
        m.month = s - m.year * 12 + 1;
        return m;
    }

    MonthIndex plus(int months) const { return from_serial(serial() + months); }

    friend auto operator<=>(const MonthIndex& a, const MonthIndex& b) {
        return a.serial() <=> b.serial();
    }
    friend bool operator==(const MonthIndex& a, const MonthIndex& b) {
        return a.serial() == b.serial();
    }
};

/// Parses "YYYY-MM". Throws ParseError on malformed input.
MonthIndex parse_month(const std::string& text);

/// Formats as zero-padded "YYYY-MM".
std::string format_month(MonthIndex m);

} // namespace polymodel
