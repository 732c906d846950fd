#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "hsf/error.hpp"
#include "hsf/ingest.hpp"
#include "support.hpp"

using namespace hsf;

namespace {

SolarSeries parse(const std::string& text, CsvSchema schema = {}) {
    std::istringstream in(text);
    return parse_csv(in, solar::SiteConfig{}, schema);
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::EmptyInput;
}

SolarSeries hourly(Timestamp start, int n) {
    std::vector<SolarRecord> recs;
    for (int i = 0; i < n; ++i) recs.push_back(test::record(start.plus_hours(i), 100.0 + i, 500.0));
    return SolarSeries(solar::SiteConfig{}, std::move(recs));
}

} // namespace

TEST_SUITE("ingest") {

TEST_CASE("minimal valid file") {
    const auto s = parse("timestamp,ghi,mu,sigma,entropy\n"
                         "2023-01-01T10:00:00-07:00,100,0.3,0.1,2\n"
                         "2023-01-01T11:00:00-07:00,200,0.2,0.1,2\n");
    REQUIRE(s.size() == 2);
    CHECK(s[0].timestamp < s[1].timestamp);
    CHECK(s[1].ghi == 200);
    CHECK_FALSE(s[0].ghi_clr.has_value());
    CHECK(s.with_clear_sky()[0].ghi_clr.has_value());
}

TEST_CASE("negative ghi is reported with its row") {
    try {
        parse("timestamp,ghi,mu,sigma,entropy\n"
              "2023-01-01T10:00,1,0.3,0.1,2\n"
              "2023-01-01T11:00,2,0.3,0.1,2\n"
              "2023-01-01T12:00,-5,0.3,0.1,2\n");
        FAIL("accepted negative ghi");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedRow);
        REQUIRE(e.index().has_value());
        CHECK(*e.index() == 3);
    }
}

TEST_CASE("row validation") {
    const std::string head = "timestamp,ghi,mu,sigma,entropy\n";
    CHECK(code_of([&] { parse(head + "2023-01-01T10:00,1,1.2,0.1,2\n"); }) == ErrorCode::MalformedRow);
    CHECK(code_of([&] { parse(head + "2023-01-01T10:00,1,0.3,-0.1,2\n"); }) == ErrorCode::MalformedRow);
    CHECK(code_of([&] { parse(head + "2023-01-01T10:00,1,0.3,0.1,-2\n"); }) == ErrorCode::MalformedRow);
    CHECK(code_of([&] { parse(head + "2023-01-01T10:00,nan,0.3,0.1,2\n"); }) == ErrorCode::MalformedRow);
    CHECK(code_of([&] { parse(head + "2023-01-01T10:00,1,0.3\n"); }) == ErrorCode::MalformedRow);
    CHECK(code_of([&] { parse(head + "not-a-time,1,0.3,0.1,2\n"); }) == ErrorCode::MalformedRow);
}

TEST_CASE("duplicate or decreasing timestamps") {
    const std::string head = "timestamp,ghi,mu,sigma,entropy\n";
    CHECK(code_of([&] { parse(head + "2023-01-01T10:00,1,0.3,0.1,2\n2023-01-01T10:00,1,0.3,0.1,2\n"); }) ==
          ErrorCode::NonMonotoneTimestamps);
    CHECK(code_of([&] { parse(head + "2023-01-01T11:00,1,0.3,0.1,2\n2023-01-01T10:00,1,0.3,0.1,2\n"); }) ==
          ErrorCode::NonMonotoneTimestamps);
}

TEST_CASE("empty input") {
    CHECK(code_of([&] { parse(""); }) == ErrorCode::EmptyInput);
    CHECK(code_of([&] { parse("timestamp,ghi\n"); }) == ErrorCode::EmptyInput);
}

TEST_CASE("sky statistics are required unless ghi-only") {
    const std::string text = "timestamp,ghi\n2023-01-01T10:00,1\n";
    CHECK(code_of([&] { parse(text); }) == ErrorCode::MalformedRow);
    CsvSchema schema;
    schema.ghi_only = true;
    CHECK(parse(text, schema).size() == 1);
}

TEST_CASE("csv round trip") {
    SynthConfig cfg;
    cfg.n_days = 3;
    cfg.seed = 11;
    const auto s = generate_synthetic(cfg);
    std::ostringstream out;
    write_csv(out, s);
    const auto back = parse(out.str());
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back[i].timestamp == s[i].timestamp);
        CHECK(back[i].ghi == s[i].ghi);
        CHECK(*back[i].ghi_clr == *s[i].ghi_clr);
        CHECK(*back[i].entropy == *s[i].entropy);
    }
}

TEST_CASE("day window") {
    const auto day = hourly(test::at(2023, 4, 1, 0), 24);
    const auto w = apply_day_window(day);
    REQUIRE(w.size() == 13);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i].timestamp.hour() == static_cast<int>(7 + i));
    CHECK(apply_day_window(w) == w);
    CHECK(apply_day_window(hourly(test::at(2023, 4, 1, 3), 1)).empty());
}

TEST_CASE("stratified split of a 400-sample month") {
    const auto s = hourly(test::at(2023, 1, 1, 0), 400);
    SplitSpec spec;
    spec.seed = 3;
    const auto r = stratified_split(s, spec);
    CHECK(r.train.size() == 300);
    CHECK(r.test.size() == 100);
    const auto again = stratified_split(s, spec);
    CHECK(again.train == r.train);
    CHECK(again.test == r.test);
    spec.seed = 4;
    CHECK_FALSE(stratified_split(s, spec).train == r.train);
}

TEST_CASE("single-sample month goes to train") {
    const SolarSeries s(solar::SiteConfig{}, {test::record(test::at(2023, 2, 3, 10), 1, 2)});
    const auto r = stratified_split(s, SplitSpec{});
    CHECK(r.train.size() == 1);
    CHECK(r.test.empty());
}

TEST_CASE("split partitions every month within rounding") {
    SynthConfig cfg;
    cfg.seed = 5;
    cfg.n_days = 120;
    const auto s = apply_day_window(generate_synthetic(cfg));
    for (double f : {0.5, 0.75, 0.9}) {
        SplitSpec spec{f, 9, SplitGranularity::Sample};
        const auto r = stratified_split(s, spec);
        CHECK(r.train.size() + r.test.size() == s.size());
        std::set<Timestamp> seen;
        for (const auto& x : r.train.records()) seen.insert(x.timestamp);
        for (const auto& x : r.test.records()) CHECK(seen.insert(x.timestamp).second);
        std::map<int, std::pair<double, double>> per_month;
        for (const auto& x : r.train.records()) per_month[x.timestamp.month()].first += 1;
        for (const auto& x : s.records()) per_month[x.timestamp.month()].second += 1;
        for (const auto& [m, counts] : per_month) {
            CHECK(counts.first == std::floor(f * counts.second + 0.5));
            CHECK(std::abs(counts.first / counts.second - f) <= 1.0 / counts.second);
        }
    }
}

TEST_CASE("day-level split keeps days whole") {
    SynthConfig cfg;
    cfg.seed = 5;
    cfg.n_days = 60;
    const auto s = generate_synthetic(cfg);
    const auto r = stratified_split(s, SplitSpec{0.75, 1, SplitGranularity::Day});
    std::set<std::int64_t> train_days, test_days;
    for (const auto& x : r.train.records()) train_days.insert(x.timestamp.day_index());
    for (const auto& x : r.test.records()) test_days.insert(x.timestamp.day_index());
    for (auto d : test_days) CHECK_FALSE(train_days.contains(d));
    CHECK(r.train.size() % 13 == 0);
}

TEST_CASE("split rejects bad input") {
    CHECK(code_of([] { stratified_split(SolarSeries{}, SplitSpec{}); }) == ErrorCode::EmptyInput);
    CHECK(code_of([] { stratified_split(hourly(test::at(2023, 1, 1, 0), 3), SplitSpec{1.0, 0, SplitGranularity::Sample}); }) ==
          ErrorCode::InvalidConfig);
}

TEST_CASE("synthetic year") {
    SynthConfig cfg;
    cfg.seed = 42;
    const auto s = generate_synthetic(cfg);
    CHECK(s.size() == 365u * 13u);
    std::ostringstream a, b;
    write_csv(a, s);
    write_csv(b, generate_synthetic(cfg));
    CHECK(a.str() == b.str());
    for (const auto& r : s.records()) {
        CHECK(r.timestamp.hour() >= 7);
        CHECK(r.timestamp.hour() <= 19);
        CHECK(r.ghi >= 0.0);
        CHECK(r.ghi <= 1.5 * *r.ghi_clr + 1e-9);
        CHECK(r.has_sky_stats());
    }
}

TEST_CASE("clear-day limit of the generator") {
    SynthConfig cfg;
    cfg.n_days = 20;
    cfg.sky_noise = false;
    for (auto& r : cfg.csi_regimes) r = {1.0, 0.0, 0.5};
    const auto s = generate_synthetic(cfg);
    for (const auto& r : s.records()) {
        CHECK(r.ghi == *r.ghi_clr);
        if (*r.ghi_clr > 0.0) CHECK(r.ghi / *r.ghi_clr == 1.0);
    }
}

TEST_CASE("synthetic config validation and keys") {
    SynthConfig cfg;
    cfg.n_days = 0;
    CHECK(code_of([&] { generate_synthetic(cfg); }) == ErrorCode::InvalidConfig);
    cfg.n_days = 10;
    cfg.csi_regimes[3].persistence = 1.0;
    CHECK(code_of([&] { generate_synthetic(cfg); }) == ErrorCode::InvalidConfig);

    std::istringstream in("# comment\nn_days = 30\ncsi_mean_12 = 0.4\ncsi_phi_9=0.2\nstart_date=2022-03-01\n");
    SynthConfig keyed;
    apply_synth_keys(keyed, read_key_values(in));
    CHECK(keyed.n_days == 30);
    CHECK(keyed.csi_regimes[5].mean == 0.4);
    CHECK(keyed.csi_regimes[2].persistence == 0.2);
    CHECK(keyed.start_date.year == 2022);
    CHECK(code_of([&] { apply_synth_keys(keyed, {{"bogus", "1"}}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([&] { apply_synth_keys(keyed, {{"csi_mean_3", "1"}}); }) == ErrorCode::InvalidConfig);
}

} // TEST_SUITE
