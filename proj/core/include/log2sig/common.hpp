#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace log2sig {

// Error taxonomy. Each family maps to one process exit code in the CLI:
// config/usage -> 1, data -> 2, numeric -> 3.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ClassificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResampleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Calendar day as days since 1970-01-01 (proleptic Gregorian).
using Day = std::int32_t;

constexpr std::int64_t kSecondsPerDay = 86400;

// Howard Hinnant's civil date algorithms.
constexpr Day days_from_civil(int y, unsigned m, unsigned d) noexcept {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<Day>(era * 146097 + static_cast<int>(doe) - 719468);
}

struct CivilDate {
    int year;
    unsigned month;
    unsigned day;
};

constexpr CivilDate civil_from_days(Day z) noexcept {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {y + (m <= 2), m, d};
}

// "YYYY-MM-DD"
std::string format_day(Day day);
// Strict "YYYY-MM-DD"; throws SchemaError on malformed input.
Day parse_day(const std::string& text);

// Strict "MM/DD/YYYY HH:MM:SS" -> seconds since epoch (no zone applied).
// Returns false on malformed input instead of throwing; log rows with bad
// timestamps are skipped, not fatal.
bool parse_cert_timestamp(const std::string& text, std::int64_t& out_epoch_seconds);

std::string format_cert_timestamp(std::int64_t epoch_seconds);

// Day index and local hour under a fixed UTC offset (minutes).
inline Day day_of_timestamp(std::int64_t epoch_seconds, int tz_offset_minutes = 0) {
    const std::int64_t shifted = epoch_seconds + std::int64_t(tz_offset_minutes) * 60;
    std::int64_t d = shifted / kSecondsPerDay;
    if (shifted < 0 && shifted % kSecondsPerDay != 0) --d;
    return static_cast<Day>(d);
}

inline int hour_of_timestamp(std::int64_t epoch_seconds, int tz_offset_minutes = 0) {
    const std::int64_t shifted = epoch_seconds + std::int64_t(tz_offset_minutes) * 60;
    std::int64_t sec = shifted % kSecondsPerDay;
    if (sec < 0) sec += kSecondsPerDay;
    return static_cast<int>(sec / 3600);
}

}  // namespace log2sig
