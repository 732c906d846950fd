#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.hpp"

namespace hsf::learners::detail {

namespace {

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double loss(Variant variant, std::span<const double> y, std::span<const double> f, double t_scale, double dof) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - f[i];
        switch (variant) {
        case Variant::LaplaceLoss: s += std::abs(r); break;
        case Variant::TDistLoss: {
            const double u = r / t_scale;
            s += 0.5 * (dof + 1.0) * std::log1p(u * u / dof);
            break;
        }
        default: s += r * r;
        }
    }
    return s / static_cast<double>(y.size());
}

} // namespace

TrainedLearner train_gbm(const LearnerSpec& spec, const Matrix& x, std::span<const double> y) {
    const auto& p = spec.gbm;
    const std::size_t n = x.rows();
    const Variant variant = spec.variant;
    const double dof = p.t_dof;

    GbmModel model;
    model.shrinkage = p.shrinkage;
    model.init = variant == Variant::LaplaceLoss ? median({y.begin(), y.end()}) : mean(y);

    // Residual scale for the t-distribution loss: 1.4826 * MAD, falling back
    // to the standard deviation, then 1.
    double t_scale = 1.0;
    if (variant == Variant::TDistLoss) {
        std::vector<double> absdev(n);
        const double med = median({y.begin(), y.end()});
        for (std::size_t i = 0; i < n; ++i) absdev[i] = std::abs(y[i] - med);
        t_scale = 1.4826 * median(absdev);
        if (!(t_scale > 1e-12)) t_scale = target_scaling(y).second;
    }

    std::vector<double> f(n, model.init), grad(n), residual(n);
    std::vector<std::size_t> samples(n);
    std::iota(samples.begin(), samples.end(), std::size_t{0});
    CartOptions opt;
    opt.max_depth = p.max_depth;
    opt.min_leaf = p.min_leaf;

    TrainDiagnostics diag;
    diag.loss_history.push_back(loss(variant, y, f, t_scale, dof));

    for (int round = 0; round < p.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            residual[i] = y[i] - f[i];
            switch (variant) {
            case Variant::LaplaceLoss: grad[i] = residual[i] > 0 ? 1.0 : (residual[i] < 0 ? -1.0 : 0.0); break;
            case Variant::TDistLoss: {
                const double u = residual[i] / t_scale;
                grad[i] = (dof + 1.0) * u / (dof + u * u);
                break;
            }
            default: grad[i] = residual[i];
            }
        }
        auto fit = grow_cart(x, grad, samples, opt, nullptr);
        auto& nodes = fit.tree.nodes;

        if (variant != Variant::SquaredLoss) {
            std::vector<std::vector<std::size_t>> members(nodes.size());
            for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(fit.leaf_of_sample[i])].push_back(i);
            for (std::size_t leaf = 0; leaf < nodes.size(); ++leaf) {
                if (nodes[leaf].feature >= 0 || members[leaf].empty()) continue;
                if (variant == Variant::LaplaceLoss) {
                    std::vector<double> r;
                    r.reserve(members[leaf].size());
                    for (auto i : members[leaf]) r.push_back(residual[i]);
                    nodes[leaf].value = median(std::move(r));
                } else {
                    // Newton step with the IRLS (Fisher) curvature w = (dof+1) / (dof + u^2),
                    // which stays positive where the exact Hessian does not.
                    double g_sum = 0.0, w_sum = 0.0;
                    for (auto i : members[leaf]) {
                        const double u = residual[i] / t_scale;
                        g_sum += grad[i];
                        w_sum += (dof + 1.0) / (dof + u * u);
                    }
                    nodes[leaf].value = w_sum > 0.0 ? t_scale * g_sum / w_sum : 0.0;
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            f[i] += p.shrinkage * nodes[static_cast<std::size_t>(fit.leaf_of_sample[i])].value;
        model.trees.push_back(std::move(fit.tree));
        diag.loss_history.push_back(loss(variant, y, f, t_scale, dof));
    }

    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) mse += (y[i] - f[i]) * (y[i] - f[i]);
    diag.final_training_loss = mse / static_cast<double>(n);
    return TrainedLearner(spec, x.cols(), std::move(model), std::move(diag));
}

} // namespace hsf::learners::detail
