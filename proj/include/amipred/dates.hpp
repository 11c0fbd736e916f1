#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "amipred/errors.hpp"

namespace amipred {

// Days between 0000-03-01 and 1970-01-01 in the proleptic Gregorian
// calendar; used by the civil-date conversion below.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yr = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = yr + (m <= 2);
}

// Calendar timestamp with second resolution. Labeling happens at day
// precision; durations keep the fractional part.
class Timestamp {
public:
    Timestamp() = default;
    explicit Timestamp(std::int64_t seconds_since_epoch) : secs_(seconds_since_epoch) {}

    static Timestamp from_civil(int y, unsigned m, unsigned d,
                                unsigned hh = 0, unsigned mm = 0, unsigned ss = 0) {
        return Timestamp(days_from_civil(y, m, d) * 86400 +
                         static_cast<std::int64_t>(hh) * 3600 + mm * 60 + ss);
    }

    // Accepts "YYYY-MM-DD" with an optional " HH:MM:SS" or "THH:MM:SS" part.
    static Timestamp parse(const std::string& text) {
        int y = 0;
        unsigned m = 0, d = 0, hh = 0, mm = 0, ss = 0;
        char sep = 0;
        int n = std::sscanf(text.c_str(), "%d-%u-%u%c%u:%u:%u", &y, &m, &d, &sep, &hh, &mm, &ss);
        if (n != 3 && n != 7)
            throw DataError("unparseable timestamp: '" + text + "'");
        if (n == 7 && sep != ' ' && sep != 'T')
            throw DataError("unparseable timestamp: '" + text + "'");
        if (m < 1 || m > 12 || d < 1 || d > 31 || hh > 23 || mm > 59 || ss > 60)
            throw DataError("timestamp out of range: '" + text + "'");
        return from_civil(y, m, d, hh, mm, ss);
    }

    std::int64_t seconds() const { return secs_; }
    // Floor division so pre-epoch times land on the right civil day.
    std::int64_t day() const {
        return secs_ >= 0 ? secs_ / 86400 : (secs_ - 86399) / 86400;
    }
    unsigned month() const {
        int y;
        unsigned m, d;
        civil_from_days(day(), y, m, d);
        return m;
    }

    std::string to_string() const {
        int y;
        unsigned m, d;
        civil_from_days(day(), y, m, d);
        std::int64_t rem = secs_ - day() * 86400;
        char buf[72];
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02lld:%02lld:%02lld", y, m, d,
                      static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                      static_cast<long long>(rem % 60));
        return buf;
    }

    friend bool operator==(Timestamp a, Timestamp b) { return a.secs_ == b.secs_; }
    friend bool operator!=(Timestamp a, Timestamp b) { return a.secs_ != b.secs_; }
    friend bool operator<(Timestamp a, Timestamp b) { return a.secs_ < b.secs_; }
    friend bool operator<=(Timestamp a, Timestamp b) { return a.secs_ <= b.secs_; }
    friend bool operator>(Timestamp a, Timestamp b) { return a.secs_ > b.secs_; }
    friend bool operator>=(Timestamp a, Timestamp b) { return a.secs_ >= b.secs_; }

private:
    std::int64_t secs_ = 0;
};

inline double days_between(Timestamp from, Timestamp to) {
    return static_cast<double>(to.seconds() - from.seconds()) / 86400.0;
}

}  // namespace amipred
