#pragma once

#include <compare>
#include <string>

namespace ibnr {

/// Calendar month, the time unit of every triangle in this library.
struct YearMonth {
    int year = 0;
    int month = 1; // 1..12

    auto operator<=>(const YearMonth&) const = default;

    /// Months since year 0, used for index arithmetic.
    int index() const { return year * 12 + (month - 1); }

    YearMonth plus_months(int n) const;

    /// "YYYY-MM"
    std::string str() const;
};

/// Full calendar date; only the month part participates in binning,
/// but days are validated so malformed records are rejected early.
struct Date {
    int year = 0;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    YearMonth year_month() const { return {year, month}; }
    std::string str() const;
};

/// Parse strict ISO-8601 "YYYY-MM-DD". Throws InputError on anything else,
/// including impossible days such as 2023-02-30.
Date parse_date(const std::string& text);

/// Parse "YYYY-MM". Throws InputError.
YearMonth parse_year_month(const std::string& text);

/// 1-based difference in calendar months: same month -> 1.
inline int month_offset(YearMonth from, YearMonth to) {
    return to.index() - from.index() + 1;
}

} // namespace ibnr
