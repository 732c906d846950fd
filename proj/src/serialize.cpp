#include "hsf/serialize.hpp"

#include <fstream>
#include <map>

#include "hsf/error.hpp"

namespace hsf::io {

using learners::Family;
using learners::Variant;

namespace {

constexpr std::pair<Family, const char*> kFamilies[] = {
    {Family::ANN, "ANN"}, {Family::SVM, "SVM"}, {Family::GBM, "GBM"}, {Family::RF, "RF"}, {Family::Reference, "Reference"},
};

constexpr std::pair<Variant, const char*> kVariants[] = {
    {Variant::StandardBackprop, "standard-backprop"},
    {Variant::MomentumBackprop, "momentum-backprop"},
    {Variant::ResilientBackprop, "resilient-backprop"},
    {Variant::RbfKernel, "rbf"},
    {Variant::LinearKernel, "linear"},
    {Variant::SquaredLoss, "squared"},
    {Variant::LaplaceLoss, "laplace"},
    {Variant::TDistLoss, "t-dist"},
    {Variant::Cart, "cart"},
    {Variant::FeaturePassthrough, "passthrough"},
    {Variant::InputMean, "input-mean"},
};

template <class E, std::size_t N>
const char* enum_name(const std::pair<E, const char*> (&table)[N], E value) {
    for (const auto& [e, name] : table)
        if (e == value) return name;
    throw Error(ErrorCode::FormatError, "unnamed enum value");
}

template <class E, std::size_t N>
E enum_value(const std::pair<E, const char*> (&table)[N], const std::string& name) {
    for (const auto& [e, n] : table)
        if (name == n) return e;
    throw Error(ErrorCode::FormatError, "unknown name " + name);
}

void check_header(const Json& j, const char* format) {
    if (!j.is_object() || j.value("format", "") != format)
        throw Error(ErrorCode::FormatError, std::string("expected a ") + format + " document");
    if (j.at("version").get<int>() != kFormatVersion)
        throw Error(ErrorCode::FormatError, "unsupported version " + j.at("version").dump());
}

Json tree_to_json(const learners::RegressionTree& tree) {
    Json feature = Json::array(), threshold = Json::array(), left = Json::array(), right = Json::array(),
         value = Json::array();
    for (const auto& n : tree.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
    }
    return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

learners::RegressionTree tree_from_json(const Json& j) {
    const auto feature = j.at("feature").get<std::vector<int>>();
    const auto threshold = j.at("threshold").get<std::vector<double>>();
    const auto left = j.at("left").get<std::vector<int>>();
    const auto right = j.at("right").get<std::vector<int>>();
    const auto value = j.at("value").get<std::vector<double>>();
    const std::size_t n = feature.size();
    if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n)
        throw Error(ErrorCode::FormatError, "tree columns differ in length");
    learners::RegressionTree tree;
    tree.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        tree.nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
        const auto in_range = [n](int c) { return c >= 0 && static_cast<std::size_t>(c) < n; };
        if (feature[i] >= 0 && (!in_range(left[i]) || !in_range(right[i])))
            throw Error(ErrorCode::FormatError, "tree child index out of range", static_cast<long long>(i));
    }
    return tree;
}

Json trees_to_json(const std::vector<learners::RegressionTree>& trees) {
    Json out = Json::array();
    for (const auto& t : trees) out.push_back(tree_to_json(t));
    return out;
}

std::vector<learners::RegressionTree> trees_from_json(const Json& j) {
    std::vector<learners::RegressionTree> out;
    for (const auto& t : j) out.push_back(tree_from_json(t));
    return out;
}

Json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data().begin(), m.data().end())},
            {"standardized", m.standardized()}};
}

Matrix matrix_from_json(const Json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) throw Error(ErrorCode::FormatError, "matrix size mismatch");
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
    m.mark_standardized(j.at("standardized").get<bool>());
    return m;
}

struct ParamsToJson {
    Json operator()(const learners::AnnModel& m) const {
        return {{"kind", "ann"}, {"hidden", m.hidden}, {"w1", m.w1}, {"b1", m.b1}, {"w2", m.w2},
                {"b2", m.b2},    {"y_mean", m.y_mean}, {"y_scale", m.y_scale}};
    }
    Json operator()(const learners::SvrModel& m) const {
        return {{"kind", "svr"}, {"linear", m.linear}, {"gamma", m.gamma}, {"support", matrix_to_json(m.support)},
                {"coef", m.coef}, {"w", m.w}, {"rho", m.rho}, {"y_mean", m.y_mean}, {"y_scale", m.y_scale}};
    }
    Json operator()(const learners::GbmModel& m) const {
        return {{"kind", "gbm"}, {"init", m.init}, {"shrinkage", m.shrinkage}, {"trees", trees_to_json(m.trees)}};
    }
    Json operator()(const learners::ForestModel& m) const {
        return {{"kind", "forest"}, {"trees", trees_to_json(m.trees)}};
    }
    Json operator()(const learners::ReferenceModel&) const { return {{"kind", "reference"}}; }
};

learners::Parameters params_from_json(const Json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "ann") {
        learners::AnnModel m;
        m.hidden = j.at("hidden").get<std::size_t>();
        m.w1 = j.at("w1").get<std::vector<double>>();
        m.b1 = j.at("b1").get<std::vector<double>>();
        m.w2 = j.at("w2").get<std::vector<double>>();
        m.b2 = j.at("b2").get<double>();
        m.y_mean = j.at("y_mean").get<double>();
        m.y_scale = j.at("y_scale").get<double>();
        if (m.b1.size() != m.hidden || m.w2.size() != m.hidden)
            throw Error(ErrorCode::FormatError, "ANN layer sizes disagree with hidden count");
        return m;
    }
    if (kind == "svr") {
        learners::SvrModel m;
        m.linear = j.at("linear").get<bool>();
        m.gamma = j.at("gamma").get<double>();
        m.support = matrix_from_json(j.at("support"));
        m.coef = j.at("coef").get<std::vector<double>>();
        m.w = j.at("w").get<std::vector<double>>();
        m.rho = j.at("rho").get<double>();
        m.y_mean = j.at("y_mean").get<double>();
        m.y_scale = j.at("y_scale").get<double>();
        if (!m.linear && m.coef.size() != m.support.rows())
            throw Error(ErrorCode::FormatError, "SVR coefficient count disagrees with support vectors");
        return m;
    }
    if (kind == "gbm") {
        learners::GbmModel m;
        m.init = j.at("init").get<double>();
        m.shrinkage = j.at("shrinkage").get<double>();
        m.trees = trees_from_json(j.at("trees"));
        return m;
    }
    if (kind == "forest") return learners::ForestModel{trees_from_json(j.at("trees"))};
    if (kind == "reference") return learners::ReferenceModel{};
    throw Error(ErrorCode::FormatError, "unknown parameter kind " + kind);
}

Json bank_to_json(const mmff::FirstLayerBank& bank) {
    Json out = Json::array();
    for (const auto& m : bank.models) out.push_back(to_json(m));
    return out;
}

std::shared_ptr<const mmff::FirstLayerBank> bank_from_json(const Json& j) {
    auto bank = std::make_shared<mmff::FirstLayerBank>();
    for (const auto& m : j) bank->models.push_back(learner_from_json(m));
    return bank;
}

Json scores_to_json(const std::vector<mmff::CandidateScore>& scores) {
    Json out = Json::array();
    for (const auto& s : scores) out.push_back({{"name", s.name}, {"nmae", s.nmae}, {"nrmse", s.nrmse}});
    return out;
}

std::vector<mmff::CandidateScore> scores_from_json(const Json& j) {
    std::vector<mmff::CandidateScore> out;
    for (const auto& s : j) out.push_back({s.at("name").get<std::string>(), s.at("nmae").get<double>(), s.at("nrmse").get<double>()});
    return out;
}

// Serializes models whose banks live in `banks`, adding unseen banks.
class BankTable {
public:
    Json model(const mmff::MmffModel& m) {
        if (!m.first_layer) throw Error(ErrorCode::FormatError, "MMFF model without a first layer");
        auto it = index_.find(m.first_layer.get());
        if (it == index_.end()) {
            it = index_.emplace(m.first_layer.get(), banks_.size()).first;
            banks_.push_back(bank_to_json(*m.first_layer));
        }
        return {{"bank", it->second}, {"stack_scaler", to_json(m.stack_scaler)}, {"blender", to_json(m.blender)},
                {"cv_scores", scores_to_json(m.cv_scores)}};
    }
    Json banks() const { return banks_; }

private:
    std::map<const mmff::FirstLayerBank*, std::size_t> index_;
    Json banks_ = Json::array();
};

mmff::MmffModel model_from_json(const Json& j, const std::vector<std::shared_ptr<const mmff::FirstLayerBank>>& banks) {
    const auto b = j.at("bank").get<std::size_t>();
    if (b >= banks.size()) throw Error(ErrorCode::FormatError, "bank index out of range", static_cast<long long>(b));
    mmff::MmffModel m;
    m.first_layer = banks[b];
    m.stack_scaler = standardizer_from_json(j.at("stack_scaler"));
    m.blender = learner_from_json(j.at("blender"));
    m.cv_scores = scores_from_json(j.at("cv_scores"));
    return m;
}

std::vector<std::shared_ptr<const mmff::FirstLayerBank>> banks_from_json(const Json& j) {
    std::vector<std::shared_ptr<const mmff::FirstLayerBank>> out;
    for (const auto& b : j) out.push_back(bank_from_json(b));
    return out;
}

const char* feature_set_name(features::FeatureSet s) { return s == features::FeatureSet::Full ? "full" : "ghi-only"; }

features::FeatureSet feature_set_from(const Json& j) {
    const auto name = j.get<std::string>();
    if (name == "full") return features::FeatureSet::Full;
    if (name == "ghi-only") return features::FeatureSet::GhiOnly;
    throw Error(ErrorCode::FormatError, "unknown feature set " + name);
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::FormatError, e.what());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidConfig) throw;
        throw Error(ErrorCode::FormatError, e.what());
    }
}

} // namespace

Json to_json(const learners::LearnerSpec& spec) {
    Json j = {{"family", enum_name(kFamilies, spec.family)}, {"variant", enum_name(kVariants, spec.variant)}};
    switch (spec.family) {
    case Family::ANN:
        j["params"] = {{"hidden", spec.ann.hidden},
                       {"max_epochs", spec.ann.max_epochs},
                       {"learning_rate", spec.ann.learning_rate},
                       {"momentum", spec.ann.momentum},
                       {"target_mse", spec.ann.target_mse},
                       {"rprop_increase", spec.ann.rprop_increase},
                       {"rprop_decrease", spec.ann.rprop_decrease},
                       {"rprop_step_init", spec.ann.rprop_step_init},
                       {"rprop_step_min", spec.ann.rprop_step_min},
                       {"rprop_step_max", spec.ann.rprop_step_max}};
        break;
    case Family::SVM:
        j["params"] = {{"c", spec.svm.c},
                       {"epsilon", spec.svm.epsilon},
                       {"tolerance", spec.svm.tolerance},
                       {"max_passes", spec.svm.max_passes},
                       {"gamma", spec.svm.gamma}};
        break;
    case Family::GBM:
        j["params"] = {{"rounds", spec.gbm.rounds},
                       {"max_depth", spec.gbm.max_depth},
                       {"shrinkage", spec.gbm.shrinkage},
                       {"t_dof", spec.gbm.t_dof},
                       {"min_leaf", spec.gbm.min_leaf}};
        break;
    case Family::RF:
        j["params"] = {{"trees", spec.rf.trees},
                       {"min_leaf", spec.rf.min_leaf},
                       {"mtry", spec.rf.mtry},
                       {"max_depth", spec.rf.max_depth},
                       {"bootstrap", spec.rf.bootstrap}};
        break;
    case Family::Reference:
        j["params"] = {{"feature", spec.reference_feature}};
        break;
    }
    return j;
}

learners::LearnerSpec spec_from_json(const Json& j) {
    return guarded([&] {
        learners::LearnerSpec s = learners::make_spec(enum_value(kFamilies, j.at("family").get<std::string>()),
                                                      enum_value(kVariants, j.at("variant").get<std::string>()));
        const auto& p = j.at("params");
        switch (s.family) {
        case Family::ANN:
            s.ann.hidden = p.at("hidden");
            s.ann.max_epochs = p.at("max_epochs");
            s.ann.learning_rate = p.at("learning_rate");
            s.ann.momentum = p.at("momentum");
            s.ann.target_mse = p.at("target_mse");
            s.ann.rprop_increase = p.at("rprop_increase");
            s.ann.rprop_decrease = p.at("rprop_decrease");
            s.ann.rprop_step_init = p.at("rprop_step_init");
            s.ann.rprop_step_min = p.at("rprop_step_min");
            s.ann.rprop_step_max = p.at("rprop_step_max");
            break;
        case Family::SVM:
            s.svm.c = p.at("c");
            s.svm.epsilon = p.at("epsilon");
            s.svm.tolerance = p.at("tolerance");
            s.svm.max_passes = p.at("max_passes");
            s.svm.gamma = p.at("gamma");
            break;
        case Family::GBM:
            s.gbm.rounds = p.at("rounds");
            s.gbm.max_depth = p.at("max_depth");
            s.gbm.shrinkage = p.at("shrinkage");
            s.gbm.t_dof = p.at("t_dof");
            s.gbm.min_leaf = p.at("min_leaf");
            break;
        case Family::RF:
            s.rf.trees = p.at("trees");
            s.rf.min_leaf = p.at("min_leaf");
            s.rf.mtry = p.at("mtry");
            s.rf.max_depth = p.at("max_depth");
            s.rf.bootstrap = p.at("bootstrap");
            break;
        case Family::Reference:
            s.reference_feature = p.at("feature");
            break;
        }
        s.validate();
        return s;
    });
}

Json to_json(const learners::TrainedLearner& learner) {
    const auto& d = learner.diagnostics();
    return {{"spec", to_json(learner.spec())},
            {"input_dim", learner.input_dim()},
            {"parameters", std::visit(ParamsToJson{}, learner.parameters())},
            {"diagnostics",
             {{"converged", d.converged}, {"final_training_loss", d.final_training_loss}, {"loss_history", d.loss_history}}}};
}

learners::TrainedLearner learner_from_json(const Json& j) {
    return guarded([&] {
        const auto& d = j.at("diagnostics");
        learners::TrainDiagnostics diag{d.at("converged").get<bool>(), d.at("final_training_loss").get<double>(),
                                        d.at("loss_history").get<std::vector<double>>()};
        return learners::TrainedLearner(spec_from_json(j.at("spec")), j.at("input_dim").get<std::size_t>(),
                                        params_from_json(j.at("parameters")), std::move(diag));
    });
}

Json to_json(const features::Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

features::Standardizer standardizer_from_json(const Json& j) {
    return guarded([&] {
        features::Standardizer s{j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
        if (s.mean.size() != s.scale.size()) throw Error(ErrorCode::FormatError, "standardizer columns differ in length");
        return s;
    });
}

Json to_json(const mmff::MmffModel& model) {
    BankTable table;
    Json m = table.model(model);
    return {{"format", "hsf-mmff"}, {"version", kFormatVersion}, {"banks", table.banks()}, {"model", m}};
}

mmff::MmffModel mmff_from_json(const Json& j) {
    return guarded([&] {
        check_header(j, "hsf-mmff");
        return model_from_json(j.at("model"), banks_from_json(j.at("banks")));
    });
}

Json to_json(const hs::HsForecastSystem& system) {
    BankTable table;
    Json slots = Json::array();
    for (const auto& [hour, slot] : system.slots) {
        Json models = Json::array();
        for (const auto& m : slot.by_blender) models.push_back(table.model(m));
        slots.push_back({{"target_hour", hour}, {"selected", slot.selected}, {"models", models}});
    }
    Json persistence = nullptr;
    if (system.persistence_score)
        persistence = {{"name", system.persistence_score->name},
                       {"nmae", system.persistence_score->nmae},
                       {"nrmse", system.persistence_score->nrmse}};
    return {{"format", "hsf-system"},
            {"version", kFormatVersion},
            {"site",
             {{"latitude", system.site.latitude},
              {"longitude", system.site.longitude},
              {"elevation", system.site.elevation},
              {"utc_offset", system.site.utc_offset}}},
            {"feature_set", feature_set_name(system.feature_set)},
            {"scaler", to_json(system.scaler)},
            {"persistence_score", persistence},
            {"banks", table.banks()},
            {"slots", slots}};
}

hs::HsForecastSystem system_from_json(const Json& j) {
    return guarded([&] {
        check_header(j, "hsf-system");
        hs::HsForecastSystem s;
        const auto& site = j.at("site");
        s.site = {site.at("latitude").get<double>(), site.at("longitude").get<double>(), site.at("elevation").get<double>(),
                  site.at("utc_offset").get<double>()};
        s.feature_set = feature_set_from(j.at("feature_set"));
        s.scaler = standardizer_from_json(j.at("scaler"));
        if (const auto& p = j.at("persistence_score"); !p.is_null())
            s.persistence_score = mmff::CandidateScore{p.at("name").get<std::string>(), p.at("nmae").get<double>(),
                                                       p.at("nrmse").get<double>()};
        const auto banks = banks_from_json(j.at("banks"));
        for (const auto& js : j.at("slots")) {
            hs::SlotModel slot;
            slot.target_hour = hs::HourSlot(js.at("target_hour").get<int>()).target_hour();
            slot.selected = js.at("selected").get<std::size_t>();
            for (const auto& m : js.at("models")) slot.by_blender.push_back(model_from_json(m, banks));
            if (slot.selected >= slot.by_blender.size())
                throw Error(ErrorCode::FormatError, "selected blender out of range", slot.target_hour);
            s.slots.emplace(slot.target_hour, std::move(slot));
        }
        for (int h = hs::kFirstModelSlot; h <= hs::kLastSlot; ++h)
            if (!s.slots.contains(h)) throw Error(ErrorCode::FormatError, "missing slot", h);
        return s;
    });
}

Json to_json(const hs::AllInOneGroup& group) {
    BankTable table;
    Json models = Json::array();
    for (const auto& m : group.by_blender) models.push_back(table.model(m));
    return {{"format", "hsf-all-in-one"},
            {"version", kFormatVersion},
            {"feature_set", feature_set_name(group.feature_set)},
            {"scaler", to_json(group.scaler)},
            {"banks", table.banks()},
            {"models", models}};
}

hs::AllInOneGroup group_from_json(const Json& j) {
    return guarded([&] {
        check_header(j, "hsf-all-in-one");
        hs::AllInOneGroup g;
        g.feature_set = feature_set_from(j.at("feature_set"));
        g.scaler = standardizer_from_json(j.at("scaler"));
        const auto banks = banks_from_json(j.at("banks"));
        for (const auto& m : j.at("models")) g.by_blender.push_back(model_from_json(m, banks));
        return g;
    });
}

void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out << j.dump(1) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::ModelNotFound, path.string() + " does not exist");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
    }
}

} // namespace hsf::io
