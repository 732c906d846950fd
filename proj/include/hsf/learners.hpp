#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hsf/matrix.hpp"

namespace hsf::learners {

enum class Family { ANN, SVM, GBM, RF, Reference };

enum class Variant {
    StandardBackprop,
    MomentumBackprop,
    ResilientBackprop,
    RbfKernel,
    LinearKernel,
    SquaredLoss,
    LaplaceLoss,
    TDistLoss,
    Cart,
    // Reference family: fixed functions used for wiring checks and oracles.
    FeaturePassthrough,
    InputMean,
};

struct AnnParams {
    int hidden = 10;
    int max_epochs = 2000;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double target_mse = 1e-6;
    // iRprop-
    double rprop_increase = 1.2;
    double rprop_decrease = 0.5;
    double rprop_step_init = 0.1;
    double rprop_step_min = 1e-6;
    double rprop_step_max = 50.0;
    bool operator==(const AnnParams&) const = default;
};

struct SvmParams {
    double c = 1.0;
    double epsilon = 0.1;
    double tolerance = 1e-3;
    long max_passes = 10000;
    double gamma = 0.0;  // 0 selects 1 / d
    bool operator==(const SvmParams&) const = default;
};

struct GbmParams {
    int rounds = 100;
    int max_depth = 3;
    double shrinkage = 0.1;
    double t_dof = 4.0;
    int min_leaf = 1;
    bool operator==(const GbmParams&) const = default;
};

struct ForestParams {
    int trees = 100;
    int min_leaf = 2;
    int mtry = 0;       // 0 selects max(1, d / 3)
    int max_depth = 0;  // 0 = unlimited
    bool bootstrap = true;
    bool operator==(const ForestParams&) const = default;
};

struct LearnerSpec {
    Family family = Family::RF;
    Variant variant = Variant::Cart;
    AnnParams ann;
    SvmParams svm;
    GbmParams gbm;
    ForestParams rf;
    std::size_t reference_feature = 0;  // FeaturePassthrough column

    /// Short pool name: ANN1..3, SVM1..2, GBM1..3, RF, or REF/MEAN.
    std::string name() const;
    /// Throws InvalidConfig if (family, variant) is not a known pairing.
    void validate() const;
    bool operator==(const LearnerSpec&) const = default;
};

LearnerSpec make_spec(Family family, Variant variant);
LearnerSpec passthrough_spec(std::size_t feature);
LearnerSpec input_mean_spec();

/// The nine-member pool, in fixed order: ANN1, ANN2, ANN3, SVM1, SVM2, GBM1, GBM2, GBM3, RF.
std::vector<LearnerSpec> default_pool();

/// Looks a pool member up by name ("RF", "GBM2", ...). Throws InvalidConfig.
LearnerSpec spec_by_name(std::string_view name);

// ---------------------------------------------------------------------------
// Fitted parameter sets

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> x) const;
    std::size_t leaf_index(std::span<const double> x) const;
    bool operator==(const RegressionTree&) const = default;
};

struct AnnModel {
    std::size_t hidden = 0;
    std::vector<double> w1;  // hidden x d, row-major
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;
    double y_mean = 0.0;
    double y_scale = 1.0;
    bool operator==(const AnnModel&) const = default;
};

struct SvrModel {
    bool linear = false;
    double gamma = 0.0;
    Matrix support;            // RBF only
    std::vector<double> coef;  // RBF only: alpha - alpha*
    std::vector<double> w;     // linear only
    double rho = 0.0;
    double y_mean = 0.0;
    double y_scale = 1.0;
    bool operator==(const SvrModel&) const = default;
};

struct GbmModel {
    double init = 0.0;
    double shrinkage = 0.1;
    std::vector<RegressionTree> trees;
    bool operator==(const GbmModel&) const = default;
};

struct ForestModel {
    std::vector<RegressionTree> trees;
    bool operator==(const ForestModel&) const = default;
};

struct ReferenceModel {
    bool operator==(const ReferenceModel&) const = default;
};

using Parameters = std::variant<AnnModel, SvrModel, GbmModel, ForestModel, ReferenceModel>;

struct TrainDiagnostics {
    bool converged = true;          // false: iteration cap hit, best-so-far returned
    double final_training_loss = 0.0;  // MSE in the learner's working units
    std::vector<double> loss_history;  // per boosting round (GBM)
    bool operator==(const TrainDiagnostics&) const = default;
};

class TrainedLearner {
public:
    TrainedLearner() = default;
    TrainedLearner(LearnerSpec spec, std::size_t input_dim, Parameters params, TrainDiagnostics diag = {})
        : spec_(std::move(spec)), input_dim_(input_dim), params_(std::move(params)), diag_(std::move(diag)) {}

    const LearnerSpec& spec() const { return spec_; }
    std::size_t input_dim() const { return input_dim_; }
    const Parameters& parameters() const { return params_; }
    const TrainDiagnostics& diagnostics() const { return diag_; }

    /// Throws DimensionMismatch when x.size() != input_dim().
    double predict_one(std::span<const double> x) const;
    std::vector<double> predict(const Matrix& x) const;

    bool operator==(const TrainedLearner&) const = default;

private:
    LearnerSpec spec_;
    std::size_t input_dim_ = 0;
    Parameters params_;
    TrainDiagnostics diag_;
};

/// Fits one pool member. Deterministic given (spec, X, y, seed). ANN and SVM
/// require X.standardized() (InputNotStandardized otherwise).
/// Errors: TooFewSamples (N < 2), NonFiniteInput, DimensionMismatch.
TrainedLearner train(const LearnerSpec& spec, const Matrix& x, std::span<const double> y, std::uint64_t seed);

/// Coefficient of determination.
double r_squared(std::span<const double> y, std::span<const double> pred);

} // namespace hsf::learners
