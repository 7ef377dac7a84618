#include "diarylens/datetime.hpp"

#include <cctype>
#include <cstdio>

#include "diarylens/util.hpp"

namespace diarylens {

namespace {

// Howard Hinnant's civil-days algorithm.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

int days_in_month(int year, int month) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[month - 1];
}

}  // namespace

std::string_view time_block_name(TimeBlock block) {
    switch (block) {
        case TimeBlock::Morning: return "Morning";
        case TimeBlock::Afternoon: return "Afternoon";
        case TimeBlock::Evening: return "Evening";
    }
    return "Morning";
}

std::string_view time_block_lower(TimeBlock block) {
    switch (block) {
        case TimeBlock::Morning: return "morning";
        case TimeBlock::Afternoon: return "afternoon";
        case TimeBlock::Evening: return "evening";
    }
    return "morning";
}

std::optional<TimeBlock> parse_time_block(std::string_view name) {
    const std::string lower = to_lower(name);
    if (lower == "morning") return TimeBlock::Morning;
    if (lower == "afternoon") return TimeBlock::Afternoon;
    if (lower == "evening") return TimeBlock::Evening;
    return std::nullopt;
}

std::optional<DateTime> DateTime::parse(std::string_view iso) {
    DateTime dt;
    if (!read_int(iso, 0, 4, dt.year)) return std::nullopt;
    if (iso.size() < 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    if (!read_int(iso, 5, 2, dt.month) || !read_int(iso, 8, 2, dt.day)) return std::nullopt;
    if (dt.month < 1 || dt.month > 12 || dt.day < 1) return std::nullopt;
    if (dt.day > days_in_month(dt.year, dt.month)) return std::nullopt;
    if (iso.size() == 10) return dt;  // date only, midnight
    if (iso[10] != 'T' && iso[10] != ' ') return std::nullopt;
    if (iso.size() < 16 || iso[13] != ':') return std::nullopt;
    if (!read_int(iso, 11, 2, dt.hour) || !read_int(iso, 14, 2, dt.minute)) return std::nullopt;
    if (dt.hour > 23 || dt.minute > 59) return std::nullopt;
    if (iso.size() == 16) return dt;
    if (iso.size() != 19 || iso[16] != ':') return std::nullopt;
    if (!read_int(iso, 17, 2, dt.second) || dt.second > 59) return std::nullopt;
    return dt;
}

std::string DateTime::to_string() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", year, month, day, hour,
                  minute, second);
    return std::string(buf);
}

std::int64_t DateTime::day_number() const { return days_from_civil(year, month, day); }

DateTime DateTime::plus_days(int days) const {
    DateTime out = *this;
    civil_from_days(day_number() + days, out.year, out.month, out.day);
    return out;
}

bool in_block_window(const DateTime& ts, TimeBlock block) {
    switch (block) {
        case TimeBlock::Morning: return ts.hour >= 8 && ts.hour <= 10;
        case TimeBlock::Afternoon: return ts.hour >= 13 && ts.hour <= 15;
        case TimeBlock::Evening: return ts.hour >= 19 && ts.hour <= 21;
    }
    return false;
}

}  // namespace diarylens
