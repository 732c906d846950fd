#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hsf/error.hpp"
#include "hsf/hs.hpp"
#include "hsf/solar.hpp"
#include "support.hpp"

using namespace hsf;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Almanac low-precision sun position, independent of the library's series.
double almanac_zenith(Timestamp local, const solar::SiteConfig& site) {
    const double utc_seconds = static_cast<double>(local.seconds()) - site.utc_offset * 3600.0;
    const double n = utc_seconds / 86400.0 + 2440587.5 - 2451545.0;
    const double mean_lon = std::fmod(280.460 + 0.9856474 * n, 360.0);
    const double anomaly = std::fmod(357.528 + 0.9856003 * n, 360.0) * kDeg;
    const double ecl = (mean_lon + 1.915 * std::sin(anomaly) + 0.020 * std::sin(2 * anomaly)) * kDeg;
    const double obliquity = (23.439 - 0.0000004 * n) * kDeg;
    const double ra = std::atan2(std::cos(obliquity) * std::sin(ecl), std::cos(ecl));
    const double decl = std::asin(std::sin(obliquity) * std::sin(ecl));
    const double ut_hours = std::fmod(utc_seconds / 3600.0, 24.0);
    const double gmst = std::fmod(6.697375 + 0.0657098242 * n + ut_hours, 24.0);
    const double lmst = gmst + site.longitude / 15.0;
    const double ha = lmst * 15.0 * kDeg - ra;
    const double lat = site.latitude * kDeg;
    const double cz = std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(ha);
    return std::acos(cz) / kDeg;
}

} // namespace

TEST_SUITE("solar") {

TEST_CASE("timestamps parse with offsets and format back") {
    const auto t = parse_timestamp("2023-06-21T19:00:00Z", -7.0);
    CHECK(t.hour() == 12);
    CHECK(format_timestamp(t, -7.0) == "2023-06-21T12:00:00-07:00");
    CHECK(parse_timestamp("2023-06-21T12:00:00-07:00", -7.0) == t);
    CHECK(parse_timestamp("2023-06-21 12:00", -7.0) == t);
    CHECK(t.month() == 6);
    CHECK(t.day_of_year() == 172);
    CHECK_THROWS_AS(parse_timestamp("2023-13-01T00:00", -7.0), Error);
    CHECK_THROWS_AS(parse_timestamp("yesterday", -7.0), Error);
}

TEST_CASE("site validation") {
    CHECK_NOTHROW(solar::SiteConfig{}.validate());
    CHECK_THROWS_AS((solar::SiteConfig{91.0, 0.0, 0.0, 0.0}.validate()), Error);
    CHECK_THROWS_AS((solar::SiteConfig{0.0, -181.0, 0.0, 0.0}.validate()), Error);
}

TEST_CASE("zenith near zero at equator, equinox, solar noon") {
    const solar::SiteConfig equator{0.0, 0.0, 0.0, 0.0};
    double best = 180.0;
    for (int m = 0; m < 24 * 60; ++m) {
        const Timestamp t(Timestamp::from_civil({2023, 3, 20, 0, 0, 0}).seconds() + 60LL * m);
        best = std::min(best, solar::solar_zenith(t, equator));
    }
    CHECK(best < 1.0);
}

TEST_CASE("zenith exceeds 90 degrees at local midnight") {
    for (const auto& site : {solar::SiteConfig{}, solar::SiteConfig{0.0, 0.0, 0.0, 0.0},
                             solar::SiteConfig{-33.9, 151.2, 50.0, 10.0}}) {
        for (int month = 1; month <= 12; ++month) CHECK(solar::solar_zenith(test::at(2023, month, 15, 0), site) > 90.0);
    }
}

TEST_CASE("zenith at the default site on the June solstice") {
    const solar::SiteConfig site;
    double best = 180.0;
    for (int m = 0; m < 24 * 60; ++m) {
        const Timestamp t(test::at(2023, 6, 21, 0).seconds() + 60LL * m);
        best = std::min(best, solar::solar_zenith(t, site));
    }
    // oracle: latitude minus the almanac declination at noon
    double oracle_best = 180.0;
    for (int m = 0; m < 24 * 60; ++m) {
        const Timestamp t(test::at(2023, 6, 21, 0).seconds() + 60LL * m);
        oracle_best = std::min(oracle_best, almanac_zenith(t, site));
    }
    CHECK(std::abs(best - 16.3) <= 0.5);
    CHECK(std::abs(best - oracle_best) <= 0.5);
}

TEST_CASE("zenith agrees with an independent almanac model") {
    const solar::SiteConfig site;
    for (int month = 1; month <= 12; ++month) {
        for (int hour = 6; hour <= 20; ++hour) {
            const auto t = test::at(2023, month, 10, hour);
            CHECK(std::abs(solar::solar_zenith(t, site) - almanac_zenith(t, site)) <= 0.5);
        }
    }
}

TEST_CASE("Haurwitz clear sky") {
    CHECK(std::abs(solar::clear_sky_ghi(0.0) - 1098.0 * std::exp(-0.057)) < 1e-9);
    CHECK(std::abs(solar::clear_sky_ghi(0.0) - 1037.2) <= 0.1);
    CHECK(std::abs(solar::clear_sky_ghi(60.0) - 549.0 * std::exp(-0.114)) < 1e-9);
    CHECK(std::abs(solar::clear_sky_ghi(60.0) - 489.8) <= 0.1);
    CHECK(solar::clear_sky_ghi(95.0) == 0.0);
    CHECK(solar::clear_sky_ghi(90.0) == 0.0);
    CHECK(solar::clear_sky_ghi(180.0) == 0.0);
    double prev = solar::clear_sky_ghi(0.0);
    for (double z = 0.5; z < 90.0; z += 0.5) {
        const double v = solar::clear_sky_ghi(z);
        CHECK(v >= 0.0);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("clear sky is zero whenever the sun is down") {
    const solar::SiteConfig site;
    for (int hour = 0; hour < 24; ++hour) {
        const auto v = solar::clear_sky(test::at(2023, 12, 1, hour), site);
        if (v.zenith >= 90.0) CHECK(v.ghi_clr == 0.0);
    }
}

TEST_CASE("clear-sky index") {
    CHECK(solar::clear_sky_index(500, 1000) == 0.5);
    CHECK(solar::clear_sky_index(900, 5) == 0.0);
    CHECK(solar::clear_sky_index(2000, 1000) == 1.5);
    CHECK(solar::clear_sky_index(0, 1000) == 0.0);
    for (double a : {0.5, 2.0, 7.0}) CHECK(solar::clear_sky_index(a * 300, a * 800) == doctest::Approx(300.0 / 800.0));
}

TEST_CASE("persistence baselines") {
    CHECK(solar::persistence_1ha(1.0, 800) == 800);
    CHECK(solar::persistence_1ha(0.5, 600) == 300);
    CHECK(solar::persistence_1ha(0.0, 700) == 0);
    CHECK(solar::persistence_1da(1.0, 900) == 900);
    CHECK(solar::persistence_1da(0.25, 400) == 100);
}

TEST_CASE("1DA persistence needs the previous day") {
    const SolarSeries s(solar::SiteConfig{}, {test::record(test::at(2023, 5, 2, 7), 80, 100)});
    CHECK_THROWS_WITH_AS(hs::forecast_1da(s, test::at(2023, 5, 2, 7)), doctest::Contains("MissingLag"), Error);
}

} // TEST_SUITE
