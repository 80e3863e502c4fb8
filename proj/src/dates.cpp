#include "ibnr/dates.hpp"

#include <cctype>
#include <cstdio>

#include "ibnr/common.hpp"

namespace ibnr {

namespace {

bool all_digits(const std::string& s, size_t from, size_t to) {
    if (to > s.size()) return false;
    for (size_t i = from; i < to; ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

bool is_leap(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static const int d[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap(year)) return 29;
    return d[month - 1];
}

} // namespace

YearMonth YearMonth::plus_months(int n) const {
    int idx = index() + n;
    int y = idx / 12;
    int m = idx % 12;
    if (m < 0) {
        m += 12;
        --y;
    }
    return {y, m + 1};
}

std::string YearMonth::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

std::string Date::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date parse_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !all_digits(text, 0, 4) || !all_digits(text, 5, 7) || !all_digits(text, 8, 10)) {
        throw InputError("unparseable date '" + text + "' (expected YYYY-MM-DD)");
    }
    Date d;
    d.year = std::stoi(text.substr(0, 4));
    d.month = std::stoi(text.substr(5, 2));
    d.day = std::stoi(text.substr(8, 2));
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
        throw InputError("invalid calendar date '" + text + "'");
    }
    return d;
}

YearMonth parse_year_month(const std::string& text) {
    if (text.size() != 7 || text[4] != '-' || !all_digits(text, 0, 4) || !all_digits(text, 5, 7)) {
        throw InputError("unparseable month '" + text + "' (expected YYYY-MM)");
    }
    YearMonth ym;
    ym.year = std::stoi(text.substr(0, 4));
    ym.month = std::stoi(text.substr(5, 2));
    if (ym.month < 1 || ym.month > 12) {
        throw InputError("invalid month '" + text + "'");
    }
    return ym;
}

} // namespace ibnr
