#include <algorithm>

#include "hsf/rng.hpp"
#include "internal.hpp"

namespace hsf::learners::detail {

TrainedLearner train_forest(const LearnerSpec& spec, const Matrix& x, std::span<const double> y, std::uint64_t seed) {
    const auto& p = spec.rf;
    const std::size_t n = x.rows();
    CartOptions opt;
    opt.max_depth = p.max_depth;
    opt.min_leaf = p.min_leaf;
    opt.mtry = p.mtry > 0 ? p.mtry : static_cast<int>(std::max<std::size_t>(1, x.cols() / 3));

    ForestModel model;
    model.trees.reserve(static_cast<std::size_t>(p.trees));
    const SeedPath root(seed);
    std::vector<std::size_t> samples(n);
    for (int t = 0; t < p.trees; ++t) {
        auto rng = root.child(static_cast<std::uint64_t>(t)).engine();
        for (std::size_t i = 0; i < n; ++i) samples[i] = p.bootstrap ? uniform_index(rng, n) : i;
        model.trees.push_back(grow_cart(x, y, samples, opt, &rng).tree);
    }

    TrainDiagnostics diag;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& t : model.trees) s += t.predict(x.row(i));
        const double e = s / static_cast<double>(model.trees.size()) - y[i];
        sse += e * e;
    }
    diag.final_training_loss = sse / static_cast<double>(n);
    return TrainedLearner(spec, x.cols(), std::move(model), std::move(diag));
}

} // namespace hsf::learners::detail
