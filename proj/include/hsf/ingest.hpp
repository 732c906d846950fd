#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hsf/solar.hpp"
#include "hsf/time.hpp"

namespace hsf {

struct SolarRecord {
    Timestamp timestamp;
    double ghi = 0.0;                  // W/m^2
    std::optional<double> ghi_clr;     // W/m^2, filled from the solar model when absent
    std::optional<double> mu;          // nRBR mean
    std::optional<double> sigma;       // nRBR std
    std::optional<double> entropy;     // Renyi entropy, nats

    bool has_sky_stats() const { return mu && sigma && entropy; }
    bool operator==(const SolarRecord&) const = default;
};

/// Hourly records for one site, strictly increasing in time.
class SolarSeries {
public:
    SolarSeries() = default;
    SolarSeries(solar::SiteConfig site, std::vector<SolarRecord> records);

    const solar::SiteConfig& site() const { return site_; }
    const std::vector<SolarRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const SolarRecord& operator[](std::size_t i) const { return records_[i]; }

    /// Binary search by timestamp; nullptr when absent.
    const SolarRecord* find(Timestamp t) const;

    /// Fills absent ghi_clr values from the Haurwitz model at the record time.
    SolarSeries with_clear_sky() const;

    bool operator==(const SolarSeries&) const = default;

private:
    solar::SiteConfig site_;
    std::vector<SolarRecord> records_;
};

/// Column names for parse_csv.
struct CsvSchema {
    std::string timestamp = "timestamp";
    std::string ghi = "ghi";
    std::string ghi_clr = "ghi_clr";
    std::string mu = "mu";
    std::string sigma = "sigma";
    std::string entropy = "entropy";
    /// Accept rows without mu/sigma/entropy (GHI-only feature space).
    bool ghi_only = false;
};

/// Reads `timestamp,ghi[,ghi_clr][,mu,sigma,entropy]`. Rows violating record
/// invariants raise MalformedRow with the 1-based data-row index; duplicate or
/// decreasing timestamps raise NonMonotoneTimestamps.
SolarSeries parse_csv(std::istream& in, const solar::SiteConfig& site, const CsvSchema& schema = {});

void write_csv(std::ostream& out, const SolarSeries& series);

/// Keeps records whose hour of day lies in [start_hour, end_hour].
SolarSeries apply_day_window(const SolarSeries& series, int start_hour = 7, int end_hour = 19);

enum class SplitGranularity { Sample, Day };

struct SplitSpec {
    double train_fraction = 0.75;
    std::uint64_t seed = 0;
    SplitGranularity granularity = SplitGranularity::Sample;

    void validate() const;
};

struct SplitResult {
    SolarSeries train;
    SolarSeries test;
};

/// Within each calendar month, round-half-up(train_fraction * n_month) units go
/// to train; a unit is a record (Sample) or a whole calendar day (Day).
SplitResult stratified_split(const SolarSeries& series, const SplitSpec& spec);

/// Per-hour AR(1) regime of the clear-sky index.
struct CsiRegime {
    double mean = 0.7;
    double stddev = 0.2;
    double persistence = 0.6;  // AR(1) coefficient in [0, 1)
};

/// Maps CSI onto sky-image statistics: each statistic is base + slope * (1 - min(csi, 1))
/// plus Gaussian noise, then clipped to its valid range.
struct SkyCoupling {
    double mu_base = 0.25, mu_slope = 0.45, mu_noise = 0.03;
    double sigma_base = 0.04, sigma_slope = 0.18, sigma_noise = 0.015;
    double entropy_base = 2.2, entropy_slope = 1.6, entropy_noise = 0.12;
};

struct SynthConfig {
    int n_days = 365;
    CivilTime start_date{2023, 1, 1, 0, 0, 0};
    solar::SiteConfig site;
    /// Regimes for hours 7..19 (index 0 is 7am).
    std::array<CsiRegime, 13> csi_regimes = default_regimes();
    /// Day-to-day AR(1) coefficient of the 7am CSI deviation.
    double day_persistence = 0.5;
    SkyCoupling sky_coupling;
    bool sky_noise = true;
    std::uint64_t seed = 0;

    void validate() const;

    /// Diurnal template: clear mornings, convective afternoons, hour-specific
    /// spread and persistence.
    static std::array<CsiRegime, 13> default_regimes();
};

/// One record per hour in [7, 19] per day. CSI follows the per-hour AR(1)
/// regimes (clipped to [0, 1.5]), ghi = csi * ghi_clr and the sky statistics
/// come from the coupling map. Deterministic given the seed.
SolarSeries generate_synthetic(const SynthConfig& config);

/// Reads `key = value` lines (`#` comments) into a flat map.
std::map<std::string, std::string> read_key_values(std::istream& in);

/// Applies recognised keys (n_days, start_date, seed, day_persistence,
/// sky_noise, csi_mean_H / csi_std_H / csi_phi_H for H in 7..19) to `config`.
/// Unknown keys raise InvalidConfig.
void apply_synth_keys(SynthConfig& config, const std::map<std::string, std::string>& kv);

} // namespace hsf
