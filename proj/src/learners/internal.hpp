#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hsf/learners.hpp"

namespace hsf::learners::detail {

struct CartOptions {
    int max_depth = 0;  // 0 = unlimited
    int min_leaf = 1;
    int mtry = 0;       // 0 = all features
};

struct CartFit {
    RegressionTree tree;
    /// Leaf node index for each entry of the sample list passed to grow_cart.
    std::vector<int> leaf_of_sample;
};

/// Variance-reduction CART on the rows listed in `samples` (repeats allowed,
/// as produced by bootstrap). Leaf values are target means. Splits scan sorted
/// unique values; ties go to the lowest feature index, then lowest threshold.
CartFit grow_cart(const Matrix& x, std::span<const double> target, std::span<const std::size_t> samples,
                  const CartOptions& options, std::mt19937_64* rng);

TrainedLearner train_forest(const LearnerSpec& spec, const Matrix& x, std::span<const double> y, std::uint64_t seed);
TrainedLearner train_gbm(const LearnerSpec& spec, const Matrix& x, std::span<const double> y);
TrainedLearner train_ann(const LearnerSpec& spec, const Matrix& x, std::span<const double> y, std::uint64_t seed);
TrainedLearner train_svr(const LearnerSpec& spec, const Matrix& x, std::span<const double> y);

double predict_ann(const AnnModel& m, std::span<const double> x);
double predict_svr(const SvrModel& m, std::span<const double> x);

/// (mean, scale) for internal target standardization; scale is 1 for a
/// constant target.
std::pair<double, double> target_scaling(std::span<const double> y);

} // namespace hsf::learners::detail
