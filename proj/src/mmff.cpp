#include "hsf/mmff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hsf/error.hpp"
#include "hsf/parallel.hpp"
#include "hsf/rng.hpp"

namespace hsf::mmff {

using learners::LearnerSpec;

std::vector<double> FirstLayerBank::forecast(std::span<const double> x) const {
    std::vector<double> out(models.size());
    for (std::size_t j = 0; j < models.size(); ++j) out[j] = models[j].predict_one(x);
    return out;
}

double MmffModel::raw_predict(std::span<const double> x) const {
    auto stacked = first_layer->forecast(x);
    stack_scaler.apply(stacked);
    return blender.predict_one(stacked);
}

double MmffModel::predict(std::span<const double> x) const { return std::max(0.0, raw_predict(x)); }

double MmffModel::predict_stacked(std::vector<double> bank_forecast) const {
    stack_scaler.apply(bank_forecast);
    return std::max(0.0, blender.predict_one(bank_forecast));
}

bool needs_standardized_inputs(const LearnerSpec& spec) {
    return spec.family == learners::Family::ANN || spec.family == learners::Family::SVM;
}

std::size_t pool_rank(const LearnerSpec& spec) {
    const auto pool = learners::default_pool();
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (pool[i].family == spec.family && pool[i].variant == spec.variant) return i;
    return pool.size();
}

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = SeedPath(seed).child("folds").engine();
    shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> fold(n);
    for (std::size_t p = 0; p < n; ++p) fold[order[p]] = p % k;
    return fold;
}

namespace {

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> held_out;
};

std::vector<FoldSplit> fold_splits(const std::vector<std::size_t>& fold_of_row, std::size_t k) {
    std::vector<FoldSplit> out(k);
    for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
        for (std::size_t f = 0; f < k; ++f) (fold_of_row[i] == f ? out[f].held_out : out[f].train).push_back(i);
    }
    return out;
}

std::uint64_t learner_seed(std::uint64_t seed, std::string_view purpose, const LearnerSpec& spec, std::uint64_t index) {
    return SeedPath(seed).child(purpose).child(spec.name()).child(index).value();
}

features::Standardizer identity_scaler(std::size_t d) {
    return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
}

} // namespace

std::uint64_t fold_seed(std::uint64_t seed, const LearnerSpec& spec, std::size_t fold) {
    return learner_seed(seed, "fold", spec, fold);
}

CandidateScore score_predictions(std::string name, std::span<const double> y, std::span<const double> pred) {
    double abs_sum = 0.0, sq_sum = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = pred[i] - y[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        norm += std::abs(y[i]);
    }
    const double n = static_cast<double>(y.size());
    norm /= n;
    if (!(norm > 0.0)) norm = 1.0;
    return {std::move(name), 100.0 * abs_sum / n / norm, 100.0 * std::sqrt(sq_sum / n) / norm};
}

FirstLayerResult train_first_layer(const Matrix& x, std::span<const double> y, const std::vector<LearnerSpec>& specs,
                                   const TrainOptions& options, std::uint64_t seed, FoldAudit* audit) {
    const std::size_t n = x.rows(), k = options.k_folds;
    if (k < 2) throw Error(ErrorCode::InvalidConfig, "k_folds must be >= 2");
    if (n < k) throw Error(ErrorCode::TooFewSamples, "need at least k_folds rows");
    if (specs.empty()) throw Error(ErrorCode::InvalidConfig, "empty first-layer spec list");

    StackMatrix stack{Matrix(n, specs.size()), assign_folds(n, k, seed)};
    const auto splits = fold_splits(stack.fold_of_row, k);
    if (audit) {
        audit->training_rows.clear();
        for (const auto& s : splits) audit->training_rows.push_back(s.train);
    }

    // Task (j, f) for f < k fills out-of-fold column j; f == k is the full fit.
    auto bank = std::make_shared<FirstLayerBank>();
    bank->models.resize(specs.size());
    const std::size_t tasks = specs.size() * (k + 1);
    parallel_for(tasks, options.jobs, [&](std::size_t task) {
        const std::size_t j = task / (k + 1), f = task % (k + 1);
        if (f == k) {
            bank->models[j] = learners::train(specs[j], x, y, learner_seed(seed, "bank", specs[j], 0));
            return;
        }
        const auto& split = splits[f];
        const Matrix xt = x.select_rows(split.train);
        const auto yt = select(y, split.train);
        const auto model = learners::train(specs[j], xt, yt, fold_seed(seed, specs[j], f));
        for (auto i : split.held_out) stack.forecasts(i, j) = model.predict_one(x.row(i));
    });
    return {std::move(bank), std::move(stack)};
}

namespace {

/// Scaler for the stacked forecasts: fitted z-scoring for ANN/SVM blenders,
/// identity otherwise.
std::pair<features::Standardizer, Matrix> prepare_stack(const Matrix& stack, const LearnerSpec& blender) {
    if (!needs_standardized_inputs(blender)) return {identity_scaler(stack.cols()), stack};
    auto scaler = features::fit_standardizer(stack);
    return {scaler, scaler.apply(stack)};
}

} // namespace

Selection select_blender(const StackMatrix& stack, std::span<const double> y, const std::vector<LearnerSpec>& candidates,
                         const TrainOptions& options, std::uint64_t seed) {
    if (candidates.empty()) throw Error(ErrorCode::InvalidConfig, "no blender candidates");
    const std::size_t n = stack.forecasts.rows(), k = options.k_folds;
    if (k < 2) throw Error(ErrorCode::InvalidConfig, "k_folds must be >= 2");
    if (n < k) throw Error(ErrorCode::TooFewSamples, "need at least k_folds rows for blender selection");
    if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, "stack rows != y length");

    const auto splits = fold_splits(assign_folds(n, k, SeedPath(seed).child("blender-cv").value()), k);
    std::vector<std::vector<double>> oof(candidates.size(), std::vector<double>(n, 0.0));

    parallel_for(candidates.size() * k, options.jobs, [&](std::size_t task) {
        const std::size_t c = task / k, f = task % k;
        const auto& split = splits[f];
        const Matrix train_stack = stack.forecasts.select_rows(split.train);
        const auto [scaler, scaled] = prepare_stack(train_stack, candidates[c]);
        const auto model =
            learners::train(candidates[c], scaled, select(y, split.train), learner_seed(seed, "blender-cv", candidates[c], f));
        std::vector<double> row(stack.forecasts.cols());
        for (auto i : split.held_out) {
            const auto src = stack.forecasts.row(i);
            std::copy(src.begin(), src.end(), row.begin());
            scaler.apply(row);
            oof[c][i] = model.predict_one(row);
        }
    });

    Selection sel;
    for (std::size_t c = 0; c < candidates.size(); ++c) sel.scores.push_back(score_predictions(candidates[c].name(), y, oof[c]));
    auto better = [&](std::size_t a, std::size_t b) {
        const auto &sa = sel.scores[a], &sb = sel.scores[b];
        if (sa.nrmse != sb.nrmse) return sa.nrmse < sb.nrmse;
        if (sa.nmae != sb.nmae) return sa.nmae < sb.nmae;
        const auto ra = pool_rank(candidates[a]), rb = pool_rank(candidates[b]);
        if (ra != rb) return ra < rb;
        return a < b;
    };
    for (std::size_t c = 1; c < candidates.size(); ++c)
        if (better(c, sel.best)) sel.best = c;
    return sel;
}

MmffModel fit_blender(std::shared_ptr<const FirstLayerBank> bank, const StackMatrix& stack, std::span<const double> y,
                      const LearnerSpec& blender, std::uint64_t seed) {
    auto [scaler, scaled] = prepare_stack(stack.forecasts, blender);
    MmffModel m;
    m.first_layer = std::move(bank);
    m.stack_scaler = std::move(scaler);
    m.blender = learners::train(blender, scaled, y, learner_seed(seed, "blender", blender, 0));
    return m;
}

MmffModel train_mmff(const features::FeatureDataset& dataset, const std::vector<LearnerSpec>& pool,
                     const TrainOptions& options, std::uint64_t seed) {
    const Matrix x = dataset.design_matrix();
    const auto y = dataset.targets();
    auto first = train_first_layer(x, y, pool, options, seed);
    auto sel = select_blender(first.stack, y, pool, options, seed);
    auto model = fit_blender(first.bank, first.stack, y, pool[sel.best], seed);
    model.cv_scores = std::move(sel.scores);
    return model;
}

} // namespace hsf::mmff
