#include "hsf/time.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "hsf/error.hpp"

namespace hsf {

namespace {

// Proleptic Gregorian day count (H. Hinnant's civil calendar algorithms).
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
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
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yoe + era * 400 + (m <= 2));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

[[noreturn]] void bad(std::string_view text, const char* why) {
    throw Error(ErrorCode::FormatError, "timestamp '" + std::string(text) + "': " + why);
}

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
    if (pos + len > text.size()) bad(text, "truncated");
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
    if (ec != std::errc() || ptr != text.data() + pos + len) bad(text, "non-numeric field");
    return v;
}

void expect(std::string_view text, std::size_t pos, char c) {
    if (pos >= text.size() || text[pos] != c) bad(text, "unexpected separator");
}

} // namespace

Timestamp Timestamp::from_civil(const CivilTime& c) {
    const auto days = days_from_civil(c.year, static_cast<unsigned>(c.month), static_cast<unsigned>(c.day));
    return Timestamp(days * 86400 + c.hour * 3600LL + c.minute * 60LL + c.second);
}

CivilTime Timestamp::civil() const {
    CivilTime c;
    const std::int64_t days = day_index();
    civil_from_days(days, c.year, c.month, c.day);
    const std::int64_t rem = seconds_ - days * 86400;
    c.hour = static_cast<int>(rem / 3600);
    c.minute = static_cast<int>((rem % 3600) / 60);
    c.second = static_cast<int>(rem % 60);
    return c;
}

std::int64_t Timestamp::day_index() const { return floor_div(seconds_, 86400); }

int Timestamp::hour() const { return static_cast<int>((seconds_ - day_index() * 86400) / 3600); }

int Timestamp::month() const { return civil().month; }

int Timestamp::day_of_year() const {
    const auto c = civil();
    return static_cast<int>(day_index() - days_from_civil(c.year, 1, 1)) + 1;
}

Timestamp parse_timestamp(std::string_view text, double site_utc_offset_hours) {
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    CivilTime c;
    c.year = read_int(text, 0, 4);
    expect(text, 4, '-');
    c.month = read_int(text, 5, 2);
    expect(text, 7, '-');
    c.day = read_int(text, 8, 2);
    if (text.size() < 16 || (text[10] != 'T' && text[10] != ' ')) bad(text, "missing time part");
    c.hour = read_int(text, 11, 2);
    expect(text, 13, ':');
    c.minute = read_int(text, 14, 2);
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        c.second = read_int(text, pos + 1, 2);
        pos += 3;
    }
    if (c.month < 1 || c.month > 12 || c.day < 1 || c.day > days_in_month(c.year, c.month) || c.hour > 23 ||
        c.minute > 59 || c.second > 59) {
        bad(text, "field out of range");
    }
    const auto site_offset_s = static_cast<std::int64_t>(std::llround(site_utc_offset_hours * 3600.0));
    const auto local = Timestamp::from_civil(c);
    if (pos == text.size()) return local;

    std::int64_t offset_s = 0;
    if (text[pos] == 'Z') {
        if (pos + 1 != text.size()) bad(text, "trailing characters");
    } else if (text[pos] == '+' || text[pos] == '-') {
        const int sign = text[pos] == '-' ? -1 : 1;
        const int oh = read_int(text, pos + 1, 2);
        expect(text, pos + 3, ':');
        const int om = read_int(text, pos + 4, 2);
        if (pos + 6 != text.size()) bad(text, "trailing characters");
        offset_s = sign * (oh * 3600LL + om * 60LL);
    } else {
        bad(text, "bad offset");
    }
    // local_given - offset_given = utc; site_local = utc + site_offset
    return Timestamp(local.seconds() - offset_s + site_offset_s);
}

std::string format_timestamp(Timestamp t, double site_utc_offset_hours) {
    const auto c = t.civil();
    const auto off_min = static_cast<long long>(std::llround(site_utc_offset_hours * 60.0));
    const char sign = off_min < 0 ? '-' : '+';
    const long long a = off_min < 0 ? -off_min : off_min;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d%c%02lld:%02lld", c.year, c.month, c.day, c.hour,
                  c.minute, c.second, sign, a / 60, a % 60);
    return buf;
}

} // namespace hsf
