#include <doctest.h>

#include <fstream>

#include "hsf/error.hpp"
#include "hsf/serialize.hpp"
#include "support.hpp"

using namespace hsf;
using namespace hsf::io;
using learners::spec_by_name;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::EmptyInput;
}

void check_same(const mmff::MmffModel& a, const mmff::MmffModel& b) {
    CHECK(*a.first_layer == *b.first_layer);
    CHECK(a.stack_scaler == b.stack_scaler);
    CHECK(a.blender == b.blender);
    CHECK(a.cv_scores == b.cv_scores);
}

features::FeatureDataset synthetic_features(int days) {
    SynthConfig cfg;
    cfg.n_days = days;
    cfg.seed = 2;
    return features::build_supervised(generate_synthetic(cfg));
}

} // namespace

TEST_SUITE("serialize") {

TEST_CASE("every learner kind round-trips exactly") {
    const auto x = test::normal_matrix(40, 3, 1);
    std::vector<double> y;
    for (std::size_t i = 0; i < 40; ++i) y.push_back(x(i, 0) * 2.0 + std::sin(x(i, 1)));
    auto specs = learners::default_pool();
    specs.push_back(learners::passthrough_spec(2));
    specs.push_back(learners::input_mean_spec());
    for (const auto& spec : specs) {
        CAPTURE(spec.name());
        const auto model = learners::train(spec, x, y, 4);
        const auto back = learner_from_json(Json::parse(to_json(model).dump()));
        CHECK(back == model);
        CHECK(back.predict(x) == model.predict(x));
    }
}

TEST_CASE("mmff documents round-trip") {
    const auto x = test::normal_matrix(40, 3, 2);
    std::vector<double> y;
    for (std::size_t i = 0; i < 40; ++i) y.push_back(5.0 + x(i, 0));
    const std::vector<learners::LearnerSpec> pool{spec_by_name("SVM1"), spec_by_name("GBM2")};
    const auto first = mmff::train_first_layer(x, y, pool, {4, 1}, 3);
    auto m = mmff::fit_blender(first.bank, first.stack, y, spec_by_name("SVM2"), 3);
    m.cv_scores = {{"SVM1", 1.5, 2.5}, {"SVM2", 0.5, 0.75}};
    const auto back = mmff_from_json(Json::parse(to_json(m).dump()));
    check_same(m, back);
    for (std::size_t i = 0; i < x.rows(); ++i) CHECK(back.predict(x.row(i)) == m.predict(x.row(i)));
}

TEST_CASE("systems and groups round-trip through files") {
    const auto ds = synthetic_features(25);
    const std::vector<learners::LearnerSpec> pool{spec_by_name("SVM2"), spec_by_name("GBM1")};
    auto sys = hs::train_hs(ds, pool, {5, 1}, 7, solar::SiteConfig{39.74, -105.18, 1828.8, -7});
    sys.persistence_score = mmff::CandidateScore{hs::kPersistence1da, 12.5, 20.25};

    const auto dir = test::scratch_dir("serialize");
    const auto j = to_json(sys);
    CHECK(j.at("banks").size() == 12);
    write_json(dir / "sys.json", j);
    const auto back = system_from_json(read_json(dir / "sys.json"));
    CHECK(back.site.latitude == sys.site.latitude);
    CHECK(back.site.utc_offset == sys.site.utc_offset);
    CHECK(back.feature_set == sys.feature_set);
    CHECK(back.scaler == sys.scaler);
    CHECK(back.persistence_score == sys.persistence_score);
    REQUIRE(back.slots.size() == 12);
    for (const auto& [h, slot] : sys.slots) {
        const auto& other = back.slots.at(h);
        CHECK(other.selected == slot.selected);
        REQUIRE(other.by_blender.size() == slot.by_blender.size());
        for (std::size_t b = 0; b < slot.by_blender.size(); ++b) check_same(slot.by_blender[b], other.by_blender[b]);
        // Variants still share one bank after loading.
        CHECK(other.by_blender[0].first_layer == other.by_blender[1].first_layer);
    }
    CHECK(to_json(back) == j);

    const auto group = hs::train_all_in_one_group(synthetic_features(6), pool, {5, 1}, 7);
    const auto gj = to_json(group);
    CHECK(gj.at("banks").size() == 1);
    const auto gback = group_from_json(Json::parse(gj.dump()));
    CHECK(gback.scaler == group.scaler);
    REQUIRE(gback.by_blender.size() == 2);
    for (std::size_t b = 0; b < 2; ++b) check_same(group.by_blender[b], gback.by_blender[b]);
}

TEST_CASE("unreadable documents") {
    const auto dir = test::scratch_dir("serialize_bad");
    CHECK(code_of([&] { read_json(dir / "absent.json"); }) == ErrorCode::ModelNotFound);
    std::ofstream(dir / "broken.json") << "{\"format\": ";
    CHECK(code_of([&] { read_json(dir / "broken.json"); }) == ErrorCode::FormatError);

    const auto sys_json = [] {
        hs::HsForecastSystem sys;
        sys.scaler = {{0.0}, {1.0}};
        return to_json(sys);
    }();
    auto wrong_version = sys_json;
    wrong_version["version"] = kFormatVersion + 1;
    CHECK(code_of([&] { system_from_json(wrong_version); }) == ErrorCode::FormatError);
    auto wrong_format = sys_json;
    wrong_format["format"] = "hsf-mmff";
    CHECK(code_of([&] { system_from_json(wrong_format); }) == ErrorCode::FormatError);
    auto missing = sys_json;
    missing.erase("scaler");
    CHECK(code_of([&] { system_from_json(missing); }) == ErrorCode::FormatError);
    CHECK(code_of([] { spec_from_json(Json{{"family", "SVM"}, {"variant", "cart"}}); }) == ErrorCode::FormatError);
}

} // TEST_SUITE
