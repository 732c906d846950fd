#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsf/hs.hpp"
#include "hsf/ingest.hpp"

namespace hsf::eval {

struct MetricPair {
    double nmae = 0.0;   // %
    double nrmse = 0.0;  // %
    bool operator==(const MetricPair&) const = default;
};

/// 100 * mean|yhat - y| / normalizer. LengthMismatch, ZeroNormalizer.
double nmae(std::span<const double> y, std::span<const double> yhat, double normalizer);
/// 100 * sqrt(mean (yhat - y)^2) / normalizer.
double nrmse(std::span<const double> y, std::span<const double> yhat, double normalizer);
MetricPair metrics(std::span<const double> y, std::span<const double> yhat, double normalizer);

/// 100 * (metric_a - metric_h) / metric_a; ZeroBaseline when metric_a <= 0.
double improvement(double metric_a, double metric_h);

struct Breakdown {
    std::map<int, MetricPair> by_hour;   // target hour
    std::map<int, MetricPair> by_month;  // 1..12
};

/// Metrics per target hour and per calendar month; empty groups are omitted.
Breakdown breakdown(std::span<const double> y, std::span<const double> yhat, std::span<const Timestamp> targets,
                    double normalizer);

/// "mean" (observed mean GHI of the evaluation set) or "capacity:<W/m^2>".
struct Normalizer {
    bool use_capacity = false;
    double capacity = 0.0;

    static Normalizer parse(const std::string& text);
    double resolve(std::span<const double> y) const;
};

enum class Group { HS, AllInOne };
const char* to_string(Group g);

struct ModelForecasts {
    std::string label;
    Group group = Group::HS;
    std::vector<double> predictions;
};

struct ModelResult {
    std::string label;
    Group group = Group::HS;
    MetricPair overall;
    std::optional<double> imp_a;
    std::optional<double> imp_r;
    Breakdown detail;
};

struct EvalReport {
    double normalizer = 0.0;
    std::size_t samples = 0;
    std::vector<ModelResult> models;  // input order

    const ModelResult& at(std::string_view label) const;
};

/// Scores every model on the same targets. X_h is paired with X_a; the
/// C_opt,h row is paired with the all-in-one row of lowest nRMSE (nMAE, then
/// row order, break ties).
EvalReport build_report(std::span<const double> y, std::span<const Timestamp> targets,
                        const std::vector<ModelForecasts>& models, double normalizer);

inline constexpr const char* kOptimalLabel = "C_opt,h";
inline constexpr const char* kPersistenceLabel = "P_a";

struct TestSet {
    std::vector<Timestamp> targets;
    std::vector<double> ghi;
    std::size_t skipped = 0;  // targets without the records their forecasts need
};

/// Targets in 7..19 from `targets` whose inputs exist in `context`: the
/// issue-time record for 8..19 and the previous-day record for 7.
TestSet make_test_set(const SolarSeries& context, const SolarSeries& targets);

/// Forecasts of all 20 models in report order: C_opt,h, the nine X_h, the
/// nine X_a and P_a. Every model uses 1DA persistence for 7am targets.
std::vector<ModelForecasts> forecast_groups(const hs::HsForecastSystem& system, const hs::AllInOneGroup& group,
                                            const SolarSeries& context, const TestSet& test);

struct Formats {
    bool csv = true;
    bool svg = false;

    static Formats parse(const std::string& list);
};

/// Writes overall.csv, by_hour.csv and by_month.csv (and by_hour.svg,
/// by_month.svg when requested) into out_dir. IoFailure on write errors.
void emit_report(const EvalReport& report, const std::filesystem::path& out_dir, const Formats& formats);

/// Two-decimal rendering used by every report file; "-0.00" prints as "0.00".
std::string fixed2(double v);

} // namespace hsf::eval
