#pragma once
// Local calendar datetimes. Corpus timestamps carry no timezone offset and are
// interpreted as participant-local wall time, so a plain civil type is all we
// need: day arithmetic for midnight boundaries, total ordering for windows.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace diarylens {

enum class TimeBlock { Morning, Afternoon, Evening };

std::string_view time_block_name(TimeBlock block);                     // "Morning"
std::string_view time_block_lower(TimeBlock block);                    // "morning"
std::optional<TimeBlock> parse_time_block(std::string_view name);      // case-insensitive

struct DateTime {
    int year = 1970;
    int month = 1;  // 1-12
    int day = 1;    // 1-31
    int hour = 0;
    int minute = 0;
    int second = 0;

    // "YYYY-MM-DDTHH:MM:SS" or "YYYY-MM-DD HH:MM:SS"; seconds optional.
    static std::optional<DateTime> parse(std::string_view iso);

    std::string to_string() const;  // ISO-8601, always with seconds

    // Days since 1970-01-01 in the proleptic Gregorian calendar.
    std::int64_t day_number() const;
    std::int64_t seconds_of_day() const { return hour * 3600 + minute * 60 + second; }
    std::int64_t total_seconds() const { return day_number() * 86400 + seconds_of_day(); }

    DateTime start_of_day() const { return {year, month, day, 0, 0, 0}; }
    DateTime plus_days(int days) const;

    friend std::strong_ordering operator<=>(const DateTime& a, const DateTime& b) {
        return a.total_seconds() <=> b.total_seconds();
    }
    friend bool operator==(const DateTime& a, const DateTime& b) {
        return a.total_seconds() == b.total_seconds();
    }
};

// Survey windows are Morning 8-10, Afternoon 13-15, Evening 19-21 (inclusive
// hours). Out-of-window timestamps are a validation warning, not an error.
bool in_block_window(const DateTime& ts, TimeBlock block);

}  // namespace diarylens
