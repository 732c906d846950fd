#include "hsf/solar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hsf/error.hpp"

namespace hsf::solar {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

void SiteConfig::validate() const {
    if (!(std::abs(latitude) <= 90.0) || !(std::abs(longitude) <= 180.0) || !std::isfinite(elevation) ||
        !(std::abs(utc_offset) <= 14.0)) {
        throw Error(ErrorCode::InvalidConfig, "site coordinates out of range");
    }
}

double solar_zenith(Timestamp t, const SiteConfig& site) {
    const auto c = t.civil();
    const double hours = c.hour + c.minute / 60.0 + c.second / 3600.0;
    const bool leap = (c.year % 4 == 0 && c.year % 100 != 0) || c.year % 400 == 0;
    const double year_days = leap ? 366.0 : 365.0;
    // fractional year (radians)
    const double g = 2.0 * std::numbers::pi / year_days * (t.day_of_year() - 1 + (hours - 12.0) / 24.0);

    const double eqtime = 229.18 * (0.000075 + 0.001868 * std::cos(g) - 0.032077 * std::sin(g) -
                                    0.014615 * std::cos(2 * g) - 0.040849 * std::sin(2 * g));
    const double decl = 0.006918 - 0.399912 * std::cos(g) + 0.070257 * std::sin(g) - 0.006758 * std::cos(2 * g) +
                        0.000907 * std::sin(2 * g) - 0.002697 * std::cos(3 * g) + 0.00148 * std::sin(3 * g);

    const double time_offset = eqtime + 4.0 * site.longitude - 60.0 * site.utc_offset;  // minutes
    const double true_solar_minutes = hours * 60.0 + time_offset;
    const double hour_angle = (true_solar_minutes / 4.0 - 180.0) * kDeg;

    const double lat = site.latitude * kDeg;
    const double cos_z = std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(hour_angle);
    return std::acos(std::clamp(cos_z, -1.0, 1.0)) / kDeg;
}

double clear_sky_ghi(double zenith_deg) {
    if (zenith_deg >= 90.0) return 0.0;
    const double cz = std::cos(zenith_deg * kDeg);
    if (cz <= 0.0) return 0.0;
    return 1098.0 * cz * std::exp(-0.057 / cz);
}

ClearSkyValue clear_sky(Timestamp t, const SiteConfig& site) {
    const double z = solar_zenith(t, site);
    return {clear_sky_ghi(z), z};
}

double clear_sky_index(double ghi, double ghi_clr) {
    if (ghi_clr < kCsiGuard) return 0.0;
    return std::clamp(ghi / ghi_clr, 0.0, kCsiMax);
}

} // namespace hsf::solar
