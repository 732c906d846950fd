#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hsf/features.hpp"
#include "hsf/ingest.hpp"
#include "hsf/mmff.hpp"

namespace hsf::hs {

inline constexpr int kPersistenceSlot = 7;
inline constexpr int kFirstModelSlot = 8;
inline constexpr int kLastSlot = 19;
inline constexpr const char* kPersistence1da = "1DA-persistence";
inline constexpr const char* kPersistence1ha = "1HA-persistence";

/// Forecast target hour, 7..19 local standard time.
class HourSlot {
public:
    explicit HourSlot(int target_hour);
    int target_hour() const { return hour_; }
    bool is_persistence() const { return hour_ == kPersistenceSlot; }

private:
    int hour_;
};

/// MMFF models of one hour slot. All variants share one first-layer bank;
/// `by_blender` follows the pool order and `selected` is the CV winner.
struct SlotModel {
    int target_hour = 0;
    std::vector<mmff::MmffModel> by_blender;
    std::size_t selected = 0;

    const mmff::MmffModel& optimal() const { return by_blender.at(selected); }
    /// Variant using the named blender ("RF", "ANN1", ...); throws InvalidConfig.
    const mmff::MmffModel& with_blender(std::string_view name) const;
};

struct SlotReport {
    int target_hour = 0;
    std::string winner;
    std::optional<double> cv_nmae;
    std::optional<double> cv_nrmse;
};

struct HsForecastSystem {
    solar::SiteConfig site;
    features::FeatureSet feature_set = features::FeatureSet::Full;
    features::Standardizer scaler;
    std::map<int, SlotModel> slots;  // target hours 8..19
    /// In-sample score of 1DA persistence on the training 7am targets, if known.
    std::optional<mmff::CandidateScore> persistence_score;

    /// One line per slot 7..19 in slot order; slot 7 is always 1DA persistence.
    std::vector<SlotReport> report() const;
};

/// Single-model comparator trained on the undivided dataset.
struct AllInOneModel {
    std::string label;
    features::Standardizer scaler;
    mmff::MmffModel model;
};

/// The full all-in-one group: one shared bank, one MMFF per pool blender.
/// The 1HA persistence baseline needs no fitted state.
struct AllInOneGroup {
    features::FeatureSet feature_set = features::FeatureSet::Full;
    features::Standardizer scaler;
    std::vector<mmff::MmffModel> by_blender;
};

/// Splits rows by target hour (issue hour + 1). Every hour 8..19 gets a key,
/// possibly empty; rows outside 8..19 are dropped.
std::map<int, features::FeatureDataset> partition_by_hour(const features::FeatureDataset& dataset);

/// Fits the standardizer on `train`, partitions it and trains one MMFF per
/// slot 8..19 (slot seeds derived from (seed, hour)). SlotTooSmall(hour) when
/// a slot has fewer than 2 * k_folds rows.
HsForecastSystem train_hs(const features::FeatureDataset& train, const std::vector<learners::LearnerSpec>& pool,
                          const mmff::TrainOptions& options, std::uint64_t seed, const solar::SiteConfig& site = {});

/// Trains one slot's models from an already standardized subset.
SlotModel train_slot(int target_hour, const features::FeatureDataset& standardized_subset,
                     const std::vector<learners::LearnerSpec>& pool, const mmff::TrainOptions& options,
                     std::uint64_t seed);

AllInOneGroup train_all_in_one_group(const features::FeatureDataset& train,
                                     const std::vector<learners::LearnerSpec>& blenders,
                                     const mmff::TrainOptions& options, std::uint64_t seed);

/// One all-in-one MMFF with a fixed blender; the first layer is the full pool.
AllInOneModel train_all_in_one(const features::FeatureDataset& train, const learners::LearnerSpec& blender,
                               const mmff::TrainOptions& options, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Persistence baselines against a series

/// Clear-sky GHI for `t`: the record's value when present, else the model.
double clear_sky_at(const SolarSeries& context, Timestamp t);

/// Yesterday's same-hour CSI times today's clear sky. MissingLag when the
/// previous-day record is absent.
double forecast_1da(const SolarSeries& context, Timestamp target);

/// CSI at target - 1h times clear sky at target. MissingContext when absent.
double forecast_1ha(const SolarSeries& context, Timestamp target);

/// In-sample score of 1DA persistence over the 7am records of `targets`.
std::optional<mmff::CandidateScore> score_1da(const SolarSeries& context, const SolarSeries& targets);

struct Forecast {
    Timestamp target_time;
    double ghi = 0.0;
};

/// Forecast for issue_time + 1h. Targets at 7am use 1DA persistence; targets
/// 8..19 go to that slot's optimal MMFF with inputs from the issue-time
/// record. OutOfWindow for other targets, MissingContext when records lack.
Forecast forecast(const HsForecastSystem& system, const SolarSeries& context, Timestamp issue_time);

/// As forecast(), using the slot variant with the named blender.
Forecast forecast_with_blender(const HsForecastSystem& system, const SolarSeries& context, Timestamp issue_time,
                               std::string_view blender);

/// All-in-one forecast with blender index `b`; 7am targets fall back to 1DA
/// persistence because their 6am input is outside the window.
Forecast forecast_all_in_one(const AllInOneGroup& group, std::size_t b, const SolarSeries& context,
                             Timestamp issue_time);

} // namespace hsf::hs
