#include <algorithm>
#include <cmath>
#include <numeric>

#include "hsf/rng.hpp"
#include "internal.hpp"

namespace hsf::learners::detail {

namespace {

// tanh through one exp call; saturates cleanly for large |z|.
inline double fast_tanh(double z) {
    if (z > 20.0) return 1.0;
    if (z < -20.0) return -1.0;
    return 1.0 - 2.0 / (std::exp(2.0 * z) + 1.0);
}

/// Flat parameter vector: [w1 (h*d) | b1 (h) | w2 (h) | b2].
struct Net {
    std::size_t d, h;
    std::vector<double> theta;

    Net(std::size_t d_, std::size_t h_) : d(d_), h(h_), theta(h_ * d_ + 2 * h_ + 1, 0.0) {}

    double* w1() { return theta.data(); }
    double* b1() { return theta.data() + h * d; }
    double* w2() { return theta.data() + h * d + h; }
    double& b2() { return theta.back(); }
    const double* w1() const { return theta.data(); }
    const double* b1() const { return theta.data() + h * d; }
    const double* w2() const { return theta.data() + h * d + h; }
    double b2() const { return theta.back(); }

    double forward(std::span<const double> x, std::vector<double>& act) const {
        double out = b2();
        for (std::size_t k = 0; k < h; ++k) {
            double z = b1()[k];
            const double* wk = w1() + k * d;
            for (std::size_t j = 0; j < d; ++j) z += wk[j] * x[j];
            act[k] = fast_tanh(z);
            out += w2()[k] * act[k];
        }
        return out;
    }

    /// Adds d(0.5 * err^2)/d(theta) * scale into grad.
    void accumulate_gradient(std::span<const double> x, const std::vector<double>& act, double err, double scale,
                             std::vector<double>& grad) const {
        double* g_w1 = grad.data();
        double* g_b1 = grad.data() + h * d;
        double* g_w2 = grad.data() + h * d + h;
        const double e = err * scale;
        for (std::size_t k = 0; k < h; ++k) {
            g_w2[k] += e * act[k];
            const double delta = e * w2()[k] * (1.0 - act[k] * act[k]);
            g_b1[k] += delta;
            double* gk = g_w1 + k * d;
            for (std::size_t j = 0; j < d; ++j) gk[j] += delta * x[j];
        }
        grad.back() += e;
    }

    double mse(const Matrix& x, std::span<const double> ys, std::vector<double>& act) const {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double e = forward(x.row(i), act) - ys[i];
            s += e * e;
        }
        return s / static_cast<double>(x.rows());
    }
};

void xavier_init(Net& net, std::mt19937_64& rng) {
    const double a1 = std::sqrt(6.0 / static_cast<double>(net.d + net.h));
    const double a2 = std::sqrt(6.0 / static_cast<double>(net.h + 1));
    for (std::size_t i = 0; i < net.h * net.d; ++i) net.w1()[i] = (2.0 * uniform01(rng) - 1.0) * a1;
    for (std::size_t k = 0; k < net.h; ++k) net.w2()[k] = (2.0 * uniform01(rng) - 1.0) * a2;
}

} // namespace

TrainedLearner train_ann(const LearnerSpec& spec, const Matrix& x, std::span<const double> y, std::uint64_t seed) {
    const auto& p = spec.ann;
    const std::size_t n = x.rows();
    const auto [y_mean, y_scale] = target_scaling(y);
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = (y[i] - y_mean) / y_scale;

    Net net(x.cols(), static_cast<std::size_t>(p.hidden));
    auto rng = SeedPath(seed).child("ann").engine();
    xavier_init(net, rng);
    if (std::all_of(ys.begin(), ys.end(), [](double v) { return v == 0.0; })) {
        std::fill(net.w2(), net.w2() + net.h, 0.0);
        net.b2() = 0.0;
    }

    std::vector<double> act(net.h), grad(net.theta.size()), velocity(net.theta.size(), 0.0);
    std::vector<double> prev_grad(net.theta.size(), 0.0), step(net.theta.size(), p.rprop_step_init);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<double> best_theta = net.theta;
    std::vector<double> epoch_start;
    double best_mse = net.mse(x, ys, act);
    bool converged = best_mse < p.target_mse;

    for (int epoch = 0; epoch < p.max_epochs && !converged; ++epoch) {
        // Epoch loss: for the per-sample variants this is the running loss
        // observed during the sweep; for Rprop it is exact at the start weights.
        double epoch_sse = 0.0;
        const bool rprop = spec.variant == Variant::ResilientBackprop;
        if (rprop) epoch_start = net.theta;
        switch (spec.variant) {
        case Variant::StandardBackprop:
        case Variant::MomentumBackprop: {
            const bool momentum = spec.variant == Variant::MomentumBackprop;
            shuffle(order.begin(), order.end(), rng);
            const double lr = p.learning_rate;
            const double mom = momentum ? p.momentum : 0.0;
            const std::size_t d = net.d, h = net.h;
            double* w1 = net.w1();
            double* b1 = net.b1();
            double* w2 = net.w2();
            double* v_w1 = velocity.data();
            double* v_b1 = v_w1 + h * d;
            double* v_w2 = v_b1 + h;
            double& v_b2 = velocity.back();
            for (auto i : order) {
                const auto xi = x.row(i);
                const double err = net.forward(xi, act) - ys[i];
                epoch_sse += err * err;
                for (std::size_t k = 0; k < h; ++k) {
                    const double delta = err * w2[k] * (1.0 - act[k] * act[k]);
                    v_w2[k] = mom * v_w2[k] - lr * err * act[k];
                    w2[k] += v_w2[k];
                    v_b1[k] = mom * v_b1[k] - lr * delta;
                    b1[k] += v_b1[k];
                    double* wk = w1 + k * d;
                    double* vk = v_w1 + k * d;
                    for (std::size_t j = 0; j < d; ++j) {
                        vk[j] = mom * vk[j] - lr * delta * xi[j];
                        wk[j] += vk[j];
                    }
                }
                v_b2 = mom * v_b2 - lr * err;
                net.b2() += v_b2;
            }
            break;
        }
        case Variant::ResilientBackprop: {
            std::fill(grad.begin(), grad.end(), 0.0);
            const double scale = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double err = net.forward(x.row(i), act) - ys[i];
                epoch_sse += err * err;
                net.accumulate_gradient(x.row(i), act, err, scale, grad);
            }
            for (std::size_t w = 0; w < grad.size(); ++w) {
                const double s = grad[w] * prev_grad[w];
                if (s > 0.0) {
                    step[w] = std::min(step[w] * p.rprop_increase, p.rprop_step_max);
                } else if (s < 0.0) {
                    step[w] = std::max(step[w] * p.rprop_decrease, p.rprop_step_min);
                    grad[w] = 0.0;
                }
                if (grad[w] > 0.0) net.theta[w] -= step[w];
                else if (grad[w] < 0.0) net.theta[w] += step[w];
                prev_grad[w] = grad[w];
            }
            break;
        }
        default: break;
        }

        const double mse = epoch_sse / static_cast<double>(n);
        if (!std::isfinite(mse)) break;
        if (mse < best_mse) {
            best_mse = mse;
            best_theta = rprop ? epoch_start : net.theta;
        }
        converged = mse < p.target_mse;
    }

    // Confirm the snapshot on exact training loss; keep the last iterate if it is better.
    const double last_mse = net.mse(x, ys, act);
    const std::vector<double> last_theta = net.theta;
    net.theta = best_theta;
    best_mse = net.mse(x, ys, act);
    if (std::isfinite(last_mse) && last_mse <= best_mse) {
        net.theta = last_theta;
        best_mse = last_mse;
    }
    converged = converged || best_mse < p.target_mse;
    AnnModel model;
    model.hidden = net.h;
    model.w1.assign(net.w1(), net.w1() + net.h * net.d);
    model.b1.assign(net.b1(), net.b1() + net.h);
    model.w2.assign(net.w2(), net.w2() + net.h);
    model.b2 = net.b2();
    model.y_mean = y_mean;
    model.y_scale = y_scale;

    TrainDiagnostics diag;
    diag.converged = converged;
    diag.final_training_loss = best_mse * y_scale * y_scale;
    return TrainedLearner(spec, x.cols(), std::move(model), std::move(diag));
}

double predict_ann(const AnnModel& m, std::span<const double> x) {
    const std::size_t d = x.size();
    double out = m.b2;
    for (std::size_t k = 0; k < m.hidden; ++k) {
        double z = m.b1[k];
        for (std::size_t j = 0; j < d; ++j) z += m.w1[k * d + j] * x[j];
        out += m.w2[k] * fast_tanh(z);
    }
    return out * m.y_scale + m.y_mean;
}

} // namespace hsf::learners::detail
