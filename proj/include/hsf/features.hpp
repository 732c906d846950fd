#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <span>
#include <vector>

#include "hsf/ingest.hpp"
#include "hsf/matrix.hpp"
#include "hsf/time.hpp"

namespace hsf::features {

struct SkyStats {
    double mu = 0.0;
    double sigma = 0.0;
    double entropy = 0.0;  // nats
};

/// Statistics of an nRBR histogram whose bins evenly cover [0, 1]. Entropy is
/// the Renyi entropy of order `alpha` (alpha > 0, alpha != 1).
SkyStats sky_stats_from_histogram(std::span<const double> counts, double alpha = 2.0);

/// Reads `timestamp,bin_0,...,bin_{n-1}` rows and returns per-timestamp stats.
std::map<Timestamp, SkyStats> read_histogram_csv(std::istream& in, double site_utc_offset_hours, double alpha = 2.0);

/// Overwrites mu/sigma/entropy of records that have a histogram.
SolarSeries attach_sky_stats(const SolarSeries& series, const std::map<Timestamp, SkyStats>& stats);

enum class FeatureSet {
    Full,     // (GHI, GHI_clr, CSI, mu, sigma, H)
    GhiOnly,  // (GHI, GHI_clr, CSI)
};

std::size_t feature_count(FeatureSet set);
std::vector<const char*> feature_names(FeatureSet set);

/// Input vector at issue time t, target GHI at t + 1h.
struct FeatureRow {
    std::vector<double> x;
    double y = 0.0;
    Timestamp issue_time;
    Timestamp target_time() const { return issue_time.plus_hours(1); }
};

/// Per-column z-scoring; zero-variance columns pass through unchanged.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    void apply(std::span<double> x) const;
    void invert(std::span<double> x) const;
    Matrix apply(const Matrix& m) const;
    bool operator==(const Standardizer&) const = default;
};

struct FeatureDataset {
    std::vector<FeatureRow> rows;
    FeatureSet feature_set = FeatureSet::Full;
    bool standardized = false;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
    std::size_t dims() const { return feature_count(feature_set); }

    Matrix design_matrix() const;
    std::vector<double> targets() const;
};

/// Builds the input vector from one record (ghi_clr taken from the record, or
/// the solar model when absent).
std::vector<double> feature_vector(const SolarRecord& r, const solar::SiteConfig& site, FeatureSet set);

/// Pairs each record at hour t with the same-day record at t + 1h when both
/// lie inside [start_hour, end_hour].
FeatureDataset build_supervised(const SolarSeries& series, FeatureSet set = FeatureSet::Full, int start_hour = 7,
                                int end_hour = 19);

/// Same pairing, but one row per record of `targets` whose predecessor hour is
/// present in `context`. Used to build train/test sets after a record-level
/// split: the target decides membership, the input comes from the full series.
FeatureDataset build_supervised_for_targets(const SolarSeries& context, const SolarSeries& targets,
                                            FeatureSet set = FeatureSet::Full, int start_hour = 7,
                                            int end_hour = 19);

Standardizer fit_standardizer(const FeatureDataset& train);
FeatureDataset apply_standardizer(const Standardizer& scaler, const FeatureDataset& dataset);
/// Column statistics of a raw matrix (used for the stacked forecasts).
Standardizer fit_standardizer(const Matrix& m);

struct TsCharacteristics {
    int periodicity = 0;  // samples per cycle, 0 = none found
    double trend = 0.0;
    double seasonality = 0.0;
};

/// ACF-peak periodicity plus classical additive decomposition strengths.
/// Requires at least 3 * candidate_period values; candidate_period also sets
/// the decomposition window when no period is detected.
TsCharacteristics characterize(std::span<const double> values, int candidate_period = 13);

/// Sample autocorrelation for lags 0..max_lag (biased estimator).
std::vector<double> autocorrelation(std::span<const double> values, std::size_t max_lag);

} // namespace hsf::features
