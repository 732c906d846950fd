#include <algorithm>
#include <numeric>

#include "hsf/rng.hpp"
#include "internal.hpp"

namespace hsf::learners::detail {

namespace {

struct PendingNode {
    int node;
    int depth;
    std::vector<std::size_t> positions;  // indices into the sample list
};

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

} // namespace

CartFit grow_cart(const Matrix& x, std::span<const double> target, std::span<const std::size_t> samples,
                  const CartOptions& options, std::mt19937_64* rng) {
    const std::size_t d = x.cols();
    const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, options.min_leaf));
    const std::size_t mtry =
        options.mtry <= 0 ? d : std::min<std::size_t>(d, static_cast<std::size_t>(options.mtry));

    CartFit fit;
    fit.leaf_of_sample.assign(samples.size(), 0);
    auto& nodes = fit.tree.nodes;

    std::vector<PendingNode> stack;
    {
        PendingNode root{0, 0, std::vector<std::size_t>(samples.size())};
        std::iota(root.positions.begin(), root.positions.end(), std::size_t{0});
        nodes.emplace_back();
        stack.push_back(std::move(root));
    }

    std::vector<std::size_t> features(d);
    std::vector<std::size_t> order;
    std::vector<double> prefix;

    while (!stack.empty()) {
        PendingNode cur = std::move(stack.back());
        stack.pop_back();
        const auto& pos = cur.positions;
        const std::size_t n = pos.size();

        double sum = 0.0, lo = target[samples[pos[0]]], hi = lo;
        for (auto p : pos) {
            const double t = target[samples[p]];
            sum += t;
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
        const double mean = sum / static_cast<double>(n);

        Split best;
        const bool can_split = n >= 2 * min_leaf && lo < hi && (options.max_depth <= 0 || cur.depth < options.max_depth);
        if (can_split) {
            std::iota(features.begin(), features.end(), std::size_t{0});
            std::size_t n_feat = d;
            if (mtry < d) {
                for (std::size_t k = 0; k < mtry; ++k) std::swap(features[k], features[k + uniform_index(*rng, d - k)]);
                n_feat = mtry;
                std::sort(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(mtry));
            }
            const double base = sum * sum / static_cast<double>(n);
            for (std::size_t fi = 0; fi < n_feat; ++fi) {
                const std::size_t f = features[fi];
                order = pos;
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    const double xa = x(samples[a], f), xb = x(samples[b], f);
                    return xa < xb || (xa == xb && a < b);
                });
                double left = 0.0;
                for (std::size_t k = 0; k + 1 < n; ++k) {
                    left += target[samples[order[k]]];
                    const double xa = x(samples[order[k]], f);
                    const double xb = x(samples[order[k + 1]], f);
                    if (!(xa < xb)) continue;
                    const std::size_t nl = k + 1, nr = n - nl;
                    if (nl < min_leaf || nr < min_leaf) continue;
                    const double right = sum - left;
                    const double gain = left * left / static_cast<double>(nl) + right * right / static_cast<double>(nr) - base;
                    if (gain > best.gain) {
                        double thr = xa + (xb - xa) / 2.0;
                        if (!(thr < xb)) thr = xa;
                        best = {static_cast<int>(f), thr, gain};
                    }
                }
            }
        }

        if (best.feature < 0) {
            nodes[static_cast<std::size_t>(cur.node)].value = mean;
            for (auto p : pos) fit.leaf_of_sample[p] = cur.node;
            continue;
        }

        PendingNode left{static_cast<int>(nodes.size()), cur.depth + 1, {}};
        PendingNode right{static_cast<int>(nodes.size() + 1), cur.depth + 1, {}};
        for (auto p : pos) {
            (x(samples[p], static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).positions.push_back(p);
        }
        auto& node = nodes[static_cast<std::size_t>(cur.node)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left.node;
        node.right = right.node;
        node.value = mean;
        nodes.emplace_back();
        nodes.emplace_back();
        // Right first so the left subtree is expanded next (depth-first, left-to-right).
        stack.push_back(std::move(right));
        stack.push_back(std::move(left));
    }
    return fit;
}

} // namespace hsf::learners::detail
