#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace hsf {

/// Calendar fields of a local-standard-time instant.
struct CivilTime {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;   // 0..23
    int minute = 0;
    int second = 0;
};

/// Wall-clock instant in the site's local standard time (fixed UTC offset,
/// no daylight saving). Stored as seconds since 1970-01-01T00:00 local.
class Timestamp {
public:
    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::int64_t local_seconds) : seconds_(local_seconds) {}

    static Timestamp from_civil(const CivilTime& c);

    CivilTime civil() const;
    int hour() const;
    int month() const;
    int day_of_year() const;  // 1..366
    /// Whole days since the epoch; identifies the calendar day.
    std::int64_t day_index() const;

    constexpr std::int64_t seconds() const { return seconds_; }

    Timestamp plus_hours(int h) const { return Timestamp(seconds_ + 3600LL * h); }
    Timestamp plus_days(int d) const { return Timestamp(seconds_ + 86400LL * d); }

    constexpr auto operator<=>(const Timestamp&) const = default;

private:
    std::int64_t seconds_ = 0;
};

/// Parses `YYYY-MM-DDTHH:MM[:SS][Z|±HH:MM]` (a space may replace `T`) and
/// converts it to local standard time at `site_utc_offset_hours`. Strings
/// without an offset are taken to already be in site local time.
/// Throws Error(FormatError) on malformed input.
Timestamp parse_timestamp(std::string_view text, double site_utc_offset_hours);

/// Formats as ISO-8601 with the site's fixed offset, e.g. `2023-06-21T12:00:00-07:00`.
std::string format_timestamp(Timestamp t, double site_utc_offset_hours);

} // namespace hsf
