#include <algorithm>
#include <cmath>
#include <numeric>

#include "hsf/error.hpp"
#include "internal.hpp"

namespace hsf::learners {

std::string LearnerSpec::name() const {
    switch (variant) {
    case Variant::StandardBackprop: return "ANN1";
    case Variant::MomentumBackprop: return "ANN2";
    case Variant::ResilientBackprop: return "ANN3";
    case Variant::RbfKernel: return "SVM1";
    case Variant::LinearKernel: return "SVM2";
    case Variant::SquaredLoss: return "GBM1";
    case Variant::LaplaceLoss: return "GBM2";
    case Variant::TDistLoss: return "GBM3";
    case Variant::Cart: return "RF";
    case Variant::FeaturePassthrough: return "REF" + std::to_string(reference_feature);
    case Variant::InputMean: return "MEAN";
    }
    return "?";
}

void LearnerSpec::validate() const {
    bool ok = false;
    switch (family) {
    case Family::ANN:
        ok = variant == Variant::StandardBackprop || variant == Variant::MomentumBackprop ||
             variant == Variant::ResilientBackprop;
        ok = ok && ann.hidden > 0 && ann.max_epochs >= 0;
        break;
    case Family::SVM:
        ok = (variant == Variant::RbfKernel || variant == Variant::LinearKernel) && svm.c > 0 && svm.epsilon >= 0;
        break;
    case Family::GBM:
        ok = variant == Variant::SquaredLoss || variant == Variant::LaplaceLoss || variant == Variant::TDistLoss;
        ok = ok && gbm.rounds >= 0 && gbm.max_depth >= 1 && gbm.t_dof > 0;
        break;
    case Family::RF: ok = variant == Variant::Cart && rf.trees >= 1 && rf.min_leaf >= 1; break;
    case Family::Reference: ok = variant == Variant::FeaturePassthrough || variant == Variant::InputMean; break;
    }
    if (!ok) throw Error(ErrorCode::InvalidConfig, "invalid learner spec " + name());
}

LearnerSpec make_spec(Family family, Variant variant) {
    LearnerSpec s;
    s.family = family;
    s.variant = variant;
    s.validate();
    return s;
}

LearnerSpec passthrough_spec(std::size_t feature) {
    auto s = make_spec(Family::Reference, Variant::FeaturePassthrough);
    s.reference_feature = feature;
    return s;
}

LearnerSpec input_mean_spec() { return make_spec(Family::Reference, Variant::InputMean); }

std::vector<LearnerSpec> default_pool() {
    return {
        make_spec(Family::ANN, Variant::StandardBackprop), make_spec(Family::ANN, Variant::MomentumBackprop),
        make_spec(Family::ANN, Variant::ResilientBackprop), make_spec(Family::SVM, Variant::RbfKernel),
        make_spec(Family::SVM, Variant::LinearKernel),      make_spec(Family::GBM, Variant::SquaredLoss),
        make_spec(Family::GBM, Variant::LaplaceLoss),       make_spec(Family::GBM, Variant::TDistLoss),
        make_spec(Family::RF, Variant::Cart),
    };
}

LearnerSpec spec_by_name(std::string_view name) {
    for (auto& s : default_pool())
        if (s.name() == name) return s;
    throw Error(ErrorCode::InvalidConfig, "unknown learner '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

double RegressionTree::predict(std::span<const double> x) const { return nodes[leaf_index(x)].value; }

std::size_t RegressionTree::leaf_index(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return i;
}

double TrainedLearner::predict_one(std::span<const double> x) const {
    if (x.size() != input_dim_)
        throw Error(ErrorCode::DimensionMismatch,
                    spec_.name() + " expects " + std::to_string(input_dim_) + " inputs, got " + std::to_string(x.size()));
    struct Visitor {
        const TrainedLearner& self;
        std::span<const double> x;
        double operator()(const AnnModel& m) const { return detail::predict_ann(m, x); }
        double operator()(const SvrModel& m) const { return detail::predict_svr(m, x); }
        double operator()(const GbmModel& m) const {
            double s = 0.0;
            for (const auto& t : m.trees) s += t.predict(x);
            return m.init + m.shrinkage * s;
        }
        double operator()(const ForestModel& m) const {
            double s = 0.0;
            for (const auto& t : m.trees) s += t.predict(x);
            return s / static_cast<double>(m.trees.size());
        }
        double operator()(const ReferenceModel&) const {
            if (self.spec_.variant == Variant::FeaturePassthrough) return x[self.spec_.reference_feature];
            return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
        }
    };
    return std::visit(Visitor{*this, x}, params_);
}

std::vector<double> TrainedLearner::predict(const Matrix& x) const {
    if (x.rows() > 0 && x.cols() != input_dim_)
        throw Error(ErrorCode::DimensionMismatch, spec_.name() + " input width mismatch");
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_one(x.row(i));
    return out;
}

namespace detail {

std::pair<double, double> target_scaling(std::span<const double> y) {
    const double n = static_cast<double>(y.size());
    const double m = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double v = 0.0;
    for (double t : y) v += (t - m) * (t - m);
    const double sd = std::sqrt(v / n);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) return {m, 1.0};
    return {m, sd};
}

} // namespace detail

TrainedLearner train(const LearnerSpec& spec, const Matrix& x, std::span<const double> y, std::uint64_t seed) {
    spec.validate();
    if (x.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "X rows != y length");
    if (y.size() < 2) throw Error(ErrorCode::TooFewSamples, spec.name() + " needs at least 2 samples");
    if (x.cols() == 0) throw Error(ErrorCode::DimensionMismatch, "X has no columns");
    for (double v : x.data())
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "X contains a non-finite value");
    for (double v : y)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "y contains a non-finite value");

    switch (spec.family) {
    case Family::ANN:
    case Family::SVM:
        if (!x.standardized())
            throw Error(ErrorCode::InputNotStandardized, spec.name() + " requires standardized inputs");
        return spec.family == Family::ANN ? detail::train_ann(spec, x, y, seed) : detail::train_svr(spec, x, y);
    case Family::GBM: return detail::train_gbm(spec, x, y);
    case Family::RF: return detail::train_forest(spec, x, y, seed);
    case Family::Reference:
        if (spec.variant == Variant::FeaturePassthrough && spec.reference_feature >= x.cols())
            throw Error(ErrorCode::DimensionMismatch, "passthrough feature out of range");
        return TrainedLearner(spec, x.cols(), ReferenceModel{});
    }
    throw Error(ErrorCode::InvalidConfig, "unreachable learner family");
}

double r_squared(std::span<const double> y, std::span<const double> pred) {
    if (y.size() != pred.size() || y.empty()) throw Error(ErrorCode::LengthMismatch, "r_squared");
    const double m = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
        ss_tot += (y[i] - m) * (y[i] - m);
    }
    return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
}

} // namespace hsf::learners
