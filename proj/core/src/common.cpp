#include "log2sig/common.hpp"

#include <cctype>
#include <cstdio>

namespace log2sig {

namespace {

bool all_digits(const std::string& s, size_t begin, size_t end) {
    if (end > s.size()) return false;
    for (size_t i = begin; i < end; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return begin < end;
}

int to_int(const std::string& s, size_t begin, size_t end) {
    int v = 0;
    for (size_t i = begin; i < end; ++i) v = v * 10 + (s[i] - '0');
    return v;
}

bool valid_civil(int year, int month, int day) {
    if (month < 1 || month > 12 || day < 1) return false;
    static const int kDaysIn[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = kDaysIn[month - 1];
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    if (month == 2 && leap) dim = 29;
    return day <= dim;
}

}  // namespace

std::string format_day(Day day) {
    const CivilDate c = civil_from_days(day);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

Day parse_day(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !all_digits(text, 0, 4) || !all_digits(text, 5, 7) || !all_digits(text, 8, 10)) {
        throw SchemaError("malformed date (want YYYY-MM-DD): '" + text + "'");
    }
    const int y = to_int(text, 0, 4);
    const int m = to_int(text, 5, 7);
    const int d = to_int(text, 8, 10);
    if (!valid_civil(y, m, d)) {
        throw SchemaError("date out of range: '" + text + "'");
    }
    return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

bool parse_cert_timestamp(const std::string& text, std::int64_t& out_epoch_seconds) {
    // MM/DD/YYYY HH:MM:SS
    if (text.size() != 19 || text[2] != '/' || text[5] != '/' || text[10] != ' ' ||
        text[13] != ':' || text[16] != ':') {
        return false;
    }
    if (!all_digits(text, 0, 2) || !all_digits(text, 3, 5) || !all_digits(text, 6, 10) ||
        !all_digits(text, 11, 13) || !all_digits(text, 14, 16) || !all_digits(text, 17, 19)) {
        return false;
    }
    const int month = to_int(text, 0, 2);
    const int day = to_int(text, 3, 5);
    const int year = to_int(text, 6, 10);
    const int hh = to_int(text, 11, 13);
    const int mm = to_int(text, 14, 16);
    const int ss = to_int(text, 17, 19);
    if (!valid_civil(year, month, day) || hh > 23 || mm > 59 || ss > 59) return false;
    const Day d = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    out_epoch_seconds = std::int64_t(d) * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
    return true;
}

std::string format_cert_timestamp(std::int64_t epoch_seconds) {
    const Day d = day_of_timestamp(epoch_seconds);
    const CivilDate c = civil_from_days(d);
    std::int64_t sec = epoch_seconds - std::int64_t(d) * kSecondsPerDay;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%02u/%02u/%04d %02d:%02d:%02d", c.month, c.day, c.year,
                  static_cast<int>(sec / 3600), static_cast<int>((sec / 60) % 60),
                  static_cast<int>(sec % 60));
    return buf;
}

}  // namespace log2sig
