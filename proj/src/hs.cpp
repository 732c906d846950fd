#include "hsf/hs.hpp"

#include "hsf/error.hpp"
#include "hsf/rng.hpp"

namespace hsf::hs {

HourSlot::HourSlot(int target_hour) : hour_(target_hour) {
    if (target_hour < kPersistenceSlot || target_hour > kLastSlot)
        throw Error(ErrorCode::OutOfWindow, "target hour outside 7..19", target_hour);
}

const mmff::MmffModel& SlotModel::with_blender(std::string_view name) const {
    for (const auto& m : by_blender)
        if (m.blender_spec().name() == name) return m;
    throw Error(ErrorCode::InvalidConfig, "slot " + std::to_string(target_hour) + " has no blender " + std::string(name));
}

std::vector<SlotReport> HsForecastSystem::report() const {
    std::vector<SlotReport> out;
    SlotReport first{kPersistenceSlot, kPersistence1da, std::nullopt, std::nullopt};
    if (persistence_score) {
        first.cv_nmae = persistence_score->nmae;
        first.cv_nrmse = persistence_score->nrmse;
    }
    out.push_back(first);
    for (const auto& [hour, slot] : slots) {
        const auto& best = slot.optimal();
        SlotReport r{hour, best.blender_spec().name(), std::nullopt, std::nullopt};
        if (slot.selected < best.cv_scores.size()) {
            r.cv_nmae = best.cv_scores[slot.selected].nmae;
            r.cv_nrmse = best.cv_scores[slot.selected].nrmse;
        }
        out.push_back(r);
    }
    return out;
}

std::map<int, features::FeatureDataset> partition_by_hour(const features::FeatureDataset& dataset) {
    std::map<int, features::FeatureDataset> out;
    for (int h = kFirstModelSlot; h <= kLastSlot; ++h) {
        auto& subset = out[h];
        subset.feature_set = dataset.feature_set;
        subset.standardized = dataset.standardized;
    }
    for (const auto& row : dataset.rows) {
        const int h = row.target_time().hour();
        if (auto it = out.find(h); it != out.end()) it->second.rows.push_back(row);
    }
    return out;
}

SlotModel train_slot(int target_hour, const features::FeatureDataset& subset,
                     const std::vector<learners::LearnerSpec>& pool, const mmff::TrainOptions& options,
                     std::uint64_t seed) {
    const Matrix x = subset.design_matrix();
    const auto y = subset.targets();
    auto first = mmff::train_first_layer(x, y, pool, options, seed);
    auto sel = mmff::select_blender(first.stack, y, pool, options, seed);

    SlotModel slot;
    slot.target_hour = target_hour;
    slot.selected = sel.best;
    for (const auto& blender : pool) {
        auto m = mmff::fit_blender(first.bank, first.stack, y, blender, seed);
        m.cv_scores = sel.scores;
        slot.by_blender.push_back(std::move(m));
    }
    return slot;
}

HsForecastSystem train_hs(const features::FeatureDataset& train, const std::vector<learners::LearnerSpec>& pool,
                          const mmff::TrainOptions& options, std::uint64_t seed, const solar::SiteConfig& site) {
    if (train.empty()) throw Error(ErrorCode::EmptyInput, "empty training set");
    if (pool.empty()) throw Error(ErrorCode::InvalidConfig, "empty learner pool");
    HsForecastSystem system;
    system.site = site;
    system.feature_set = train.feature_set;
    system.scaler = features::fit_standardizer(train);
    const auto subsets = partition_by_hour(features::apply_standardizer(system.scaler, train));

    for (const auto& [hour, subset] : subsets) {
        if (subset.size() < 2 * options.k_folds)
            throw Error(ErrorCode::SlotTooSmall,
                        std::to_string(subset.size()) + " rows for " + std::to_string(options.k_folds) + " folds", hour);
    }
    const SeedPath slot_root = SeedPath(seed).child("slot");
    for (const auto& [hour, subset] : subsets) {
        system.slots.emplace(hour, train_slot(hour, subset, pool, options, slot_root.child(static_cast<std::uint64_t>(hour)).value()));
    }
    return system;
}

AllInOneGroup train_all_in_one_group(const features::FeatureDataset& train,
                                     const std::vector<learners::LearnerSpec>& blenders,
                                     const mmff::TrainOptions& options, std::uint64_t seed) {
    if (train.size() < 2) throw Error(ErrorCode::TooFewSamples, "all-in-one training set is too small");
    AllInOneGroup group;
    group.feature_set = train.feature_set;
    group.scaler = features::fit_standardizer(train);
    const auto scaled = features::apply_standardizer(group.scaler, train);
    const Matrix x = scaled.design_matrix();
    const auto y = scaled.targets();
    const std::uint64_t group_seed = SeedPath(seed).child("all-in-one").value();
    auto first = mmff::train_first_layer(x, y, learners::default_pool(), options, group_seed);
    for (const auto& b : blenders) group.by_blender.push_back(mmff::fit_blender(first.bank, first.stack, y, b, group_seed));
    return group;
}

AllInOneModel train_all_in_one(const features::FeatureDataset& train, const learners::LearnerSpec& blender,
                               const mmff::TrainOptions& options, std::uint64_t seed) {
    auto group = train_all_in_one_group(train, {blender}, options, seed);
    return {blender.name() + "_a", std::move(group.scaler), std::move(group.by_blender.front())};
}

// ---------------------------------------------------------------------------

double clear_sky_at(const SolarSeries& context, Timestamp t) {
    if (const auto* r = context.find(t); r && r->ghi_clr) return *r->ghi_clr;
    return solar::clear_sky(t, context.site()).ghi_clr;
}

double forecast_1da(const SolarSeries& context, Timestamp target) {
    const auto* lag = context.find(target.plus_days(-1));
    if (!lag) throw Error(ErrorCode::MissingLag, "no record 24 h before " + format_timestamp(target, context.site().utc_offset));
    const double lag_clr = lag->ghi_clr ? *lag->ghi_clr : solar::clear_sky(lag->timestamp, context.site()).ghi_clr;
    return solar::persistence_1da(solar::clear_sky_index(lag->ghi, lag_clr), clear_sky_at(context, target));
}

double forecast_1ha(const SolarSeries& context, Timestamp target) {
    const auto* now = context.find(target.plus_hours(-1));
    if (!now) throw Error(ErrorCode::MissingContext, "no record 1 h before " + format_timestamp(target, context.site().utc_offset));
    const double clr = now->ghi_clr ? *now->ghi_clr : solar::clear_sky(now->timestamp, context.site()).ghi_clr;
    return solar::persistence_1ha(solar::clear_sky_index(now->ghi, clr), clear_sky_at(context, target));
}

std::optional<mmff::CandidateScore> score_1da(const SolarSeries& context, const SolarSeries& targets) {
    std::vector<double> y, pred;
    for (const auto& r : targets.records()) {
        if (r.timestamp.hour() != kPersistenceSlot || !context.find(r.timestamp.plus_days(-1))) continue;
        y.push_back(r.ghi);
        pred.push_back(forecast_1da(context, r.timestamp));
    }
    if (y.empty()) return std::nullopt;
    return mmff::score_predictions(kPersistence1da, y, pred);
}

namespace {

std::vector<double> scaled_input(const SolarSeries& context, Timestamp issue_time, features::FeatureSet set,
                                 const features::Standardizer& scaler) {
    const auto* rec = context.find(issue_time);
    if (!rec)
        throw Error(ErrorCode::MissingContext, "no record at issue time " + format_timestamp(issue_time, context.site().utc_offset));
    auto x = features::feature_vector(*rec, context.site(), set);
    scaler.apply(x);
    return x;
}

template <class Dispatch>
Forecast dispatch(const SolarSeries& context, Timestamp issue_time, Dispatch&& model_forecast) {
    const Timestamp target = issue_time.plus_hours(1);
    const HourSlot slot(target.hour());
    if (slot.is_persistence()) return {target, forecast_1da(context, target)};
    return {target, model_forecast(slot.target_hour())};
}

} // namespace

Forecast forecast(const HsForecastSystem& system, const SolarSeries& context, Timestamp issue_time) {
    return dispatch(context, issue_time, [&](int hour) {
        const auto x = scaled_input(context, issue_time, system.feature_set, system.scaler);
        return system.slots.at(hour).optimal().predict(x);
    });
}

Forecast forecast_with_blender(const HsForecastSystem& system, const SolarSeries& context, Timestamp issue_time,
                               std::string_view blender) {
    return dispatch(context, issue_time, [&](int hour) {
        const auto x = scaled_input(context, issue_time, system.feature_set, system.scaler);
        return system.slots.at(hour).with_blender(blender).predict(x);
    });
}

Forecast forecast_all_in_one(const AllInOneGroup& group, std::size_t b, const SolarSeries& context,
                             Timestamp issue_time) {
    return dispatch(context, issue_time, [&](int) {
        const auto x = scaled_input(context, issue_time, group.feature_set, group.scaler);
        return group.by_blender.at(b).predict(x);
    });
}

} // namespace hsf::hs
