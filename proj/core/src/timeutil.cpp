#include "veldt/timeutil.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>

namespace veldt {
namespace {

// Days-from-civil / civil-from-days, valid across the full int64 microsecond
// range (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += (m <= 2);
}

bool parse_fixed_uint(std::string_view s, size_t pos, size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace

std::string format_iso8601(Timestamp t) {
    std::int64_t us = t.micros;
    std::int64_t days = us / kMicrosPerDay;
    std::int64_t rem = us % kMicrosPerDay;
    if (rem < 0) {
        rem += kMicrosPerDay;
        days -= 1;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    const int hh = static_cast<int>(rem / kMicrosPerHour);
    const int mi = static_cast<int>((rem / kMicrosPerMinute) % 60);
    const int ss = static_cast<int>((rem / kMicrosPerSecond) % 60);
    const int frac = static_cast<int>(rem % kMicrosPerSecond);
    char buf[48];
    if (frac != 0) {
        std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02d.%06d+00:00",
                      static_cast<long long>(y), m, d, hh, mi, ss, frac);
    } else {
        std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02d+00:00",
                      static_cast<long long>(y), m, d, hh, mi, ss);
    }
    return buf;
}

std::optional<Timestamp> parse_iso8601(std::string_view s) {
    int year, mon, day, hh, mi, ss;
    if (!parse_fixed_uint(s, 0, 4, year)) return std::nullopt;
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':')
        return std::nullopt;
    if (!parse_fixed_uint(s, 5, 2, mon) || !parse_fixed_uint(s, 8, 2, day) ||
        !parse_fixed_uint(s, 11, 2, hh) || !parse_fixed_uint(s, 14, 2, mi) ||
        !parse_fixed_uint(s, 17, 2, ss))
        return std::nullopt;
    if (mon < 1 || mon > 12 || day < 1 || day > 31 || hh > 23 || mi > 59 || ss > 60)
        return std::nullopt;

    size_t pos = 19;
    std::int64_t frac = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        size_t digits = 0;
        std::int64_t scale = 100000;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9' && digits < 6) {
            frac += (s[pos] - '0') * scale;
            scale /= 10;
            ++pos;
            ++digits;
        }
        if (digits == 0) return std::nullopt;
        // More than six digits of precision is truncated.
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }

    std::int64_t offset_us = 0;
    if (pos >= s.size()) return std::nullopt;
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '+' ? 1 : -1;
        int oh, om;
        if (!parse_fixed_uint(s, pos + 1, 2, oh)) return std::nullopt;
        size_t mpos = pos + 3;
        if (mpos < s.size() && s[mpos] == ':') ++mpos;
        if (!parse_fixed_uint(s, mpos, 2, om)) return std::nullopt;
        pos = mpos + 2;
        offset_us = sign * (oh * kMicrosPerHour + om * kMicrosPerMinute);
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;

    const std::int64_t days = days_from_civil(year, mon, day);
    std::int64_t us = days * kMicrosPerDay + hh * kMicrosPerHour + mi * kMicrosPerMinute +
                      ss * kMicrosPerSecond + frac;
    return Timestamp{us - offset_us};
}

Timestamp now_utc() {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    return Timestamp{std::chrono::duration_cast<std::chrono::microseconds>(now).count()};
}

}  // namespace veldt
