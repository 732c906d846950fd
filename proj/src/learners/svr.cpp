#include <algorithm>
#include <cmath>
#include <limits>

#include "internal.hpp"

namespace hsf::learners::detail {

namespace {

constexpr double kTau = 1e-12;

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double e = a[j] - b[j];
        s += e * e;
    }
    return std::exp(-gamma * s);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

/// SMO for the epsilon-SVR dual in the 2N-variable form
///   min 0.5 b'Qb + p'b,  z'b = 0,  0 <= b <= C
/// with z = (+1..., -1...), Q_st = z_s z_t K(s mod N, t mod N),
/// p = (eps - y, eps + y). Working-set selection uses second-order
/// information (maximal violating pair with the largest objective decrease).
struct SmoResult {
    std::vector<double> beta;
    double rho = 0.0;
    bool converged = true;
};

SmoResult solve_smo(const std::vector<double>& kernel, std::size_t n, std::span<const double> y, double c, double eps,
                    double tol, long max_iter) {
    const std::size_t m = 2 * n;
    auto z = [n](std::size_t t) { return t < n ? 1.0 : -1.0; };
    auto k_at = [&](std::size_t s, std::size_t t) { return kernel[(s % n) * n + (t % n)]; };

    std::vector<double> beta(m, 0.0), grad(m);
    for (std::size_t i = 0; i < n; ++i) {
        grad[i] = eps - y[i];
        grad[i + n] = eps + y[i];
    }
    auto at_upper = [&](std::size_t t) { return beta[t] >= c; };
    auto at_lower = [&](std::size_t t) { return beta[t] <= 0.0; };

    SmoResult res;
    long iter = 0;
    for (;; ++iter) {
        // i: maximal -z_t G_t over I_up
        double gmax = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t i_sel = -1;
        for (std::size_t t = 0; t < m; ++t) {
            if (z(t) > 0) {
                if (!at_upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i_sel = static_cast<std::ptrdiff_t>(t); }
            } else {
                if (!at_lower(t) && grad[t] >= gmax) { gmax = grad[t]; i_sel = static_cast<std::ptrdiff_t>(t); }
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t j_sel = -1;
        double obj_min = std::numeric_limits<double>::infinity();
        if (i_sel >= 0) {
            const auto i = static_cast<std::size_t>(i_sel);
            const double qd_i = k_at(i, i);
            for (std::size_t t = 0; t < m; ++t) {
                const double kit = k_at(i, t);
                if (z(t) > 0) {
                    if (at_lower(t)) continue;
                    const double grad_diff = gmax + grad[t];
                    if (grad[t] >= gmax2) gmax2 = grad[t];
                    if (grad_diff > 0) {
                        double quad = qd_i + k_at(t, t) - 2.0 * kit;
                        if (quad <= 0) quad = kTau;
                        const double obj = -(grad_diff * grad_diff) / quad;
                        if (obj <= obj_min) { j_sel = static_cast<std::ptrdiff_t>(t); obj_min = obj; }
                    }
                } else {
                    if (at_upper(t)) continue;
                    const double grad_diff = gmax - grad[t];
                    if (-grad[t] >= gmax2) gmax2 = -grad[t];
                    if (grad_diff > 0) {
                        double quad = qd_i + k_at(t, t) - 2.0 * kit;
                        if (quad <= 0) quad = kTau;
                        const double obj = -(grad_diff * grad_diff) / quad;
                        if (obj <= obj_min) { j_sel = static_cast<std::ptrdiff_t>(t); obj_min = obj; }
                    }
                }
            }
        }
        if (i_sel < 0 || j_sel < 0 || gmax + gmax2 < tol) break;
        if (iter >= max_iter) {
            res.converged = false;
            break;
        }

        const auto i = static_cast<std::size_t>(i_sel), j = static_cast<std::size_t>(j_sel);
        const double q_ij = z(i) * z(j) * k_at(i, j);
        const double old_i = beta[i], old_j = beta[j];
        if (z(i) != z(j)) {
            double quad = k_at(i, i) + k_at(j, j) + 2.0 * q_ij;
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if (diff > 0) {
                if (beta[j] < 0) { beta[j] = 0; beta[i] = diff; }
            } else {
                if (beta[i] < 0) { beta[i] = 0; beta[j] = -diff; }
            }
            if (diff > 0) {
                if (beta[i] > c) { beta[i] = c; beta[j] = c - diff; }
            } else {
                if (beta[j] > c) { beta[j] = c; beta[i] = c + diff; }
            }
        } else {
            double quad = k_at(i, i) + k_at(j, j) - 2.0 * q_ij;
            if (quad <= 0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if (sum > c) {
                if (beta[i] > c) { beta[i] = c; beta[j] = sum - c; }
            } else {
                if (beta[j] < 0) { beta[j] = 0; beta[i] = sum; }
            }
            if (sum > c) {
                if (beta[j] > c) { beta[j] = c; beta[i] = sum - c; }
            } else {
                if (beta[i] < 0) { beta[i] = 0; beta[j] = sum; }
            }
        }
        const double d_i = beta[i] - old_i, d_j = beta[j] - old_j;
        for (std::size_t t = 0; t < m; ++t) {
            grad[t] += z(t) * (z(i) * k_at(i, t) * d_i + z(j) * k_at(j, t) * d_j);
        }
    }

    // rho from free variables, else the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < m; ++t) {
        const double yg = z(t) * grad[t];
        if (at_upper(t)) {
            if (z(t) < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (at_lower(t)) {
            if (z(t) > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    res.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    res.beta = std::move(beta);
    return res;
}

} // namespace

TrainedLearner train_svr(const LearnerSpec& spec, const Matrix& x, std::span<const double> y) {
    const auto& p = spec.svm;
    const std::size_t n = x.rows(), d = x.cols();
    const bool linear = spec.variant == Variant::LinearKernel;
    const double gamma = p.gamma > 0 ? p.gamma : 1.0 / static_cast<double>(d);

    const auto [y_mean, y_scale] = target_scaling(y);
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = (y[i] - y_mean) / y_scale;

    std::vector<double> kernel(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            const double k = linear ? dot(x.row(a), x.row(b)) : rbf(x.row(a), x.row(b), gamma);
            kernel[a * n + b] = k;
            kernel[b * n + a] = k;
        }
    }

    const auto smo = solve_smo(kernel, n, ys, p.c, p.epsilon, p.tolerance, p.max_passes);

    SvrModel model;
    model.linear = linear;
    model.gamma = gamma;
    model.rho = smo.rho;
    model.y_mean = y_mean;
    model.y_scale = y_scale;
    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n; ++i)
        if (smo.beta[i] - smo.beta[i + n] != 0.0) sv.push_back(i);
    if (linear) {
        model.w.assign(d, 0.0);
        for (auto i : sv) {
            const double coef = smo.beta[i] - smo.beta[i + n];
            for (std::size_t j = 0; j < d; ++j) model.w[j] += coef * x(i, j);
        }
    } else {
        model.support = x.select_rows(sv);
        model.support.mark_standardized(false);
        for (auto i : sv) model.coef.push_back(smo.beta[i] - smo.beta[i + n]);
    }

    TrainDiagnostics diag;
    diag.converged = smo.converged;
    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = predict_svr(model, x.row(i)) - y[i];
        mse += e * e;
    }
    diag.final_training_loss = mse / static_cast<double>(n);
    return TrainedLearner(spec, d, std::move(model), std::move(diag));
}

double predict_svr(const SvrModel& m, std::span<const double> x) {
    double f = -m.rho;
    if (m.linear) {
        f += dot(m.w, x);
    } else {
        for (std::size_t s = 0; s < m.coef.size(); ++s) f += m.coef[s] * rbf(m.support.row(s), x, m.gamma);
    }
    return f * m.y_scale + m.y_mean;
}

} // namespace hsf::learners::detail
