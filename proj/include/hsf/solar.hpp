#pragma once

#include "hsf/time.hpp"

namespace hsf::solar {

struct SiteConfig {
    double latitude = 39.74;     // deg, +N
    double longitude = -105.18;  // deg, +E
    double elevation = 1828.8;   // m
    double utc_offset = -7.0;    // hours, local standard time

    /// Throws Error(InvalidConfig) when |lat| > 90 or |lon| > 180.
    void validate() const;

    bool operator==(const SiteConfig&) const = default;
};

struct ClearSkyValue {
    double ghi_clr = 0.0;  // W/m^2
    double zenith = 90.0;  // deg
};

/// CSI is forced to 0 below this clear-sky irradiance (W/m^2).
inline constexpr double kCsiGuard = 10.0;
inline constexpr double kCsiMax = 1.5;

/// Solar zenith angle in degrees for a local-standard-time instant, using the
/// NOAA low-precision series for declination and equation of time.
double solar_zenith(Timestamp t, const SiteConfig& site);

/// Haurwitz clear-sky GHI: 1098 cos z exp(-0.057 / cos z), zero once the sun
/// is at or below the horizon.
double clear_sky_ghi(double zenith_deg);

ClearSkyValue clear_sky(Timestamp t, const SiteConfig& site);

/// ghi / ghi_clr clamped to [0, 1.5]; 0 when ghi_clr < 10 W/m^2.
double clear_sky_index(double ghi, double ghi_clr);

/// One-hour-ahead persistence of cloudiness.
inline double persistence_1ha(double csi_now, double ghi_clr_next) { return csi_now * ghi_clr_next; }

/// One-day-ahead persistence: yesterday's same-hour CSI applied to today's clear sky.
inline double persistence_1da(double csi_same_hour_prev_day, double ghi_clr_now) {
    return csi_same_hour_prev_day * ghi_clr_now;
}

} // namespace hsf::solar
