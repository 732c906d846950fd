#include <doctest.h>

#include <fstream>
#include <sstream>

#include "hsf/cli.hpp"
#include "support.hpp"

using namespace hsf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome hsf_run(std::vector<std::string> args) {
    args.insert(args.begin(), "hsf");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
    CHECK(cli::exit_code_for(ErrorCode::MalformedRow) == cli::kDataError);
    CHECK(cli::exit_code_for(ErrorCode::SlotTooSmall) == cli::kDataError);
    CHECK(cli::exit_code_for(ErrorCode::ModelNotFound) == cli::kUsageError);
    CHECK(cli::exit_code_for(ErrorCode::InvalidConfig) == cli::kUsageError);
    CHECK(cli::exit_code_for(ErrorCode::OutOfWindow) == cli::kUsageError);
}

TEST_CASE("usage errors") {
    const auto dir = test::scratch_dir("cli_usage");
    auto r = hsf_run({"evaluate", "--model-dir", (dir / "none").string(), "--input", (dir / "x.csv").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("ModelNotFound") != std::string::npos);

    r = hsf_run({"synth", "--output", (dir / "s.csv").string()});
    CHECK(r.code == 2);
    CHECK_FALSE(fs::exists(dir / "s.csv"));

    CHECK(hsf_run({"train", "--no-such-flag"}).code == 2);
    CHECK(hsf_run({"nonsense"}).code == 2);
    CHECK(hsf_run({"synth", "--seed", "x1", "--output", (dir / "s.csv").string()}).code == 2);
}

TEST_CASE("data errors") {
    const auto dir = test::scratch_dir("cli_data");
    std::ofstream(dir / "bad.csv") << "timestamp,ghi,mu,sigma,entropy\n2023-01-01T08:00:00-07:00,abc,0.3,0.1,2\n";
    const auto r = hsf_run({"validate", "--input", (dir / "bad.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("MalformedRow") != std::string::npos);
}

TEST_CASE("synth is deterministic and honours config precedence") {
    const auto dir = test::scratch_dir("cli_synth");
    REQUIRE(hsf_run({"synth", "--seed", "2", "--n-days", "3", "--output", (dir / "a.csv").string()}).code == 0);
    REQUIRE(hsf_run({"synth", "--seed", "2", "--n-days", "3", "--output", (dir / "b.csv").string()}).code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(line_count(slurp(dir / "a.csv")) == 1 + 3 * 13);
    REQUIRE(hsf_run({"synth", "--seed", "2", "--n-days", "3", "--output", (dir / "nested" / "a.csv").string()}).code == 0);
    CHECK(slurp(dir / "nested" / "a.csv") == slurp(dir / "a.csv"));

    std::ofstream(dir / "run.cfg") << "# settings\nseed = 1\nn_days = 3\n";
    REQUIRE(hsf_run({"synth", "--config", (dir / "run.cfg").string(), "--output", (dir / "c.csv").string()}).code == 0);
    REQUIRE(hsf_run({"synth", "--config", (dir / "run.cfg").string(), "--seed", "2", "--output", (dir / "d.csv").string()})
                .code == 0);
    CHECK(slurp(dir / "c.csv") != slurp(dir / "a.csv"));
    CHECK(slurp(dir / "d.csv") == slurp(dir / "a.csv"));

    std::ofstream(dir / "typo.cfg") << "seeed = 1\n";
    CHECK(hsf_run({"synth", "--config", (dir / "typo.cfg").string(), "--output", (dir / "e.csv").string()}).code == 2);
}

TEST_CASE("small end-to-end run") {
    const auto dir = test::scratch_dir("cli_e2e");
    const auto data = (dir / "year.csv").string(), models = (dir / "models").string();
    REQUIRE(hsf_run({"synth", "--seed", "3", "--n-days", "40", "--output", data}).code == 0);

    const auto chr = hsf_run({"characterize", "--input", data});
    REQUIRE(chr.code == 0);
    CHECK(chr.out.starts_with("feature,periodicity,trend,seasonality\n"));
    CHECK(line_count(chr.out) == 7);

    auto r = hsf_run({"train", "--input", data, "--seed", "1", "--k-folds", "3", "--model-dir", models});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    for (const char* f : {"hs_system.json", "all_in_one.json", "manifest.json", "slots.csv"}) CHECK(fs::exists(fs::path(models) / f));
    const auto slots = slurp(fs::path(models) / "slots.csv");
    CHECK(line_count(slots) == 14);
    CHECK(slots.find("\n7,1DA-persistence,") != std::string::npos);

    r = hsf_run({"evaluate", "--model-dir", models, "--input", data, "--out-dir", (dir / "report").string(), "--formats",
                 "csv,svg"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto overall = slurp(dir / "report" / "overall.csv");
    CHECK(line_count(overall) == 21);
    CHECK(overall.find("P_a,all-in-one,") != std::string::npos);
    CHECK(fs::exists(dir / "report" / "by_hour.svg"));

    r = hsf_run({"compare", "--model-dir", models, "--input", data});
    CHECK(r.code == 0);
    CHECK(r.out.find("C_opt,h") != std::string::npos);

    r = hsf_run({"forecast", "--model-dir", models, "--input", data, "--issue-time", "2023-01-20T10:00:00-07:00"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.starts_with("2023-01-20T11:00:00-07:00, "));
    r = hsf_run({"forecast", "--model-dir", models, "--input", data, "--issue-time", "2023-01-20T19:00:00-07:00"});
    CHECK(r.code == 2);
    CHECK(r.err.find("OutOfWindow") != std::string::npos);

    // Evaluating against different data than was trained on is refused.
    REQUIRE(hsf_run({"synth", "--seed", "4", "--n-days", "40", "--output", (dir / "other.csv").string()}).code == 0);
    r = hsf_run({"evaluate", "--model-dir", models, "--input", (dir / "other.csv").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("InputMismatch") != std::string::npos);
}

} // TEST_SUITE
