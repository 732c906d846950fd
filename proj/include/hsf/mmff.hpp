#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hsf/features.hpp"
#include "hsf/learners.hpp"
#include "hsf/matrix.hpp"

namespace hsf::mmff {

/// First-layer learners fitted on the full dataset, in spec order.
struct FirstLayerBank {
    std::vector<learners::TrainedLearner> models;

    std::size_t size() const { return models.size(); }
    std::vector<double> forecast(std::span<const double> x) const;
    bool operator==(const FirstLayerBank&) const = default;
};

/// Out-of-fold first-layer forecasts: entry (t, j) comes from spec j trained
/// on every fold except fold_of_row[t].
struct StackMatrix {
    Matrix forecasts;
    std::vector<std::size_t> fold_of_row;
};

/// Optional instrumentation of train_first_layer: the rows each fold model saw.
struct FoldAudit {
    std::vector<std::vector<std::size_t>> training_rows;  // per fold
};

struct CandidateScore {
    std::string name;
    double nmae = 0.0;   // %, pooled over out-of-fold predictions
    double nrmse = 0.0;  // %
    bool operator==(const CandidateScore&) const = default;
};

struct TrainOptions {
    std::size_t k_folds = 10;
    unsigned jobs = 1;
};

/// Two-layer model: bank forecasts -> (optional z-scoring) -> blender, clamped at 0.
struct MmffModel {
    std::shared_ptr<const FirstLayerBank> first_layer;
    /// Applied to the bank forecasts before the blender; identity for blenders
    /// that do not need standardized inputs.
    features::Standardizer stack_scaler;
    learners::TrainedLearner blender;
    std::vector<CandidateScore> cv_scores;

    const learners::LearnerSpec& blender_spec() const { return blender.spec(); }
    /// Blender output before the non-negativity clamp.
    double raw_predict(std::span<const double> x) const;
    double predict(std::span<const double> x) const;
    /// predict() given precomputed first_layer->forecast(x).
    double predict_stacked(std::vector<double> bank_forecast) const;
};

/// Seeded random partition of [0, n) into k near-equal folds; result[i] is
/// the fold of row i.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed);

struct FirstLayerResult {
    std::shared_ptr<const FirstLayerBank> bank;
    StackMatrix stack;
};

/// Seed of the fold-f model of `spec` inside train_first_layer(seed).
std::uint64_t fold_seed(std::uint64_t seed, const learners::LearnerSpec& spec, std::size_t fold);

/// Each spec is fitted on the full data (bank) and k times on fold
/// complements (stack). TooFewSamples when N < k.
FirstLayerResult train_first_layer(const Matrix& x, std::span<const double> y,
                                   const std::vector<learners::LearnerSpec>& specs, const TrainOptions& options,
                                   std::uint64_t seed, FoldAudit* audit = nullptr);

struct Selection {
    std::size_t best = 0;  // index into candidates
    std::vector<CandidateScore> scores;  // candidate order
};

/// Cross-validates every candidate blender on (stack, y). Best = lowest CV
/// nRMSE, then lowest nMAE, then earliest in the fixed pool order.
Selection select_blender(const StackMatrix& stack, std::span<const double> y,
                         const std::vector<learners::LearnerSpec>& candidates, const TrainOptions& options,
                         std::uint64_t seed);

/// Fits `blender` on the full out-of-fold stack.
MmffModel fit_blender(std::shared_ptr<const FirstLayerBank> bank, const StackMatrix& stack, std::span<const double> y,
                      const learners::LearnerSpec& blender, std::uint64_t seed);

/// train_first_layer + select_blender + final blender fit. `pool` serves as both
/// the first-layer specs and the blender candidates.
MmffModel train_mmff(const features::FeatureDataset& dataset, const std::vector<learners::LearnerSpec>& pool,
                     const TrainOptions& options, std::uint64_t seed);

/// pooled nMAE / nRMSE (%) with normalizer mean(|y|) (1 when zero).
CandidateScore score_predictions(std::string name, std::span<const double> y, std::span<const double> pred);

/// Rank of a spec in the fixed pool order; non-pool specs rank after it.
std::size_t pool_rank(const learners::LearnerSpec& spec);

bool needs_standardized_inputs(const learners::LearnerSpec& spec);

} // namespace hsf::mmff
