#include "hsf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hsf/error.hpp"
#include "hsf/features.hpp"

namespace hsf::eval {

namespace {

void check_inputs(std::span<const double> y, std::span<const double> yhat, double normalizer) {
    if (y.size() != yhat.size())
        throw Error(ErrorCode::LengthMismatch, std::to_string(y.size()) + " actuals vs " + std::to_string(yhat.size()) + " forecasts");
    if (y.empty()) throw Error(ErrorCode::EmptyInput, "no samples to score");
    if (!(normalizer > 0.0)) throw Error(ErrorCode::ZeroNormalizer, "normalizer must be positive");
}

} // namespace

double nmae(std::span<const double> y, std::span<const double> yhat, double normalizer) {
    check_inputs(y, yhat, normalizer);
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(yhat[i] - y[i]);
    return 100.0 * sum / static_cast<double>(y.size()) / normalizer;
}

double nrmse(std::span<const double> y, std::span<const double> yhat, double normalizer) {
    check_inputs(y, yhat, normalizer);
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += (yhat[i] - y[i]) * (yhat[i] - y[i]);
    return 100.0 * std::sqrt(sum / static_cast<double>(y.size())) / normalizer;
}

MetricPair metrics(std::span<const double> y, std::span<const double> yhat, double normalizer) {
    return {nmae(y, yhat, normalizer), nrmse(y, yhat, normalizer)};
}

double improvement(double metric_a, double metric_h) {
    if (!(metric_a > 0.0)) throw Error(ErrorCode::ZeroBaseline, "baseline metric must be positive");
    return 100.0 * (metric_a - metric_h) / metric_a;
}

Breakdown breakdown(std::span<const double> y, std::span<const double> yhat, std::span<const Timestamp> targets,
                    double normalizer) {
    if (y.size() != yhat.size() || y.size() != targets.size())
        throw Error(ErrorCode::LengthMismatch, "actuals, forecasts and timestamps differ in length");
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> hours, months;
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto& h = hours[targets[i].hour()];
        h.first.push_back(y[i]);
        h.second.push_back(yhat[i]);
        auto& m = months[targets[i].month()];
        m.first.push_back(y[i]);
        m.second.push_back(yhat[i]);
    }
    Breakdown out;
    for (const auto& [k, v] : hours) out.by_hour[k] = metrics(v.first, v.second, normalizer);
    for (const auto& [k, v] : months) out.by_month[k] = metrics(v.first, v.second, normalizer);
    return out;
}

Normalizer Normalizer::parse(const std::string& text) {
    if (text == "mean") return {};
    constexpr std::string_view prefix = "capacity:";
    if (text.starts_with(prefix)) {
        const std::string value = text.substr(prefix.size());
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != value.size() || value.empty() || !(v > 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::InvalidConfig, "capacity normalizer needs a positive number: " + text);
        return {true, v};
    }
    throw Error(ErrorCode::InvalidConfig, "normalizer must be mean or capacity:<value>, got " + text);
}

double Normalizer::resolve(std::span<const double> y) const {
    if (use_capacity) return capacity;
    if (y.empty()) throw Error(ErrorCode::EmptyInput, "no samples for the mean normalizer");
    double sum = 0.0;
    for (double v : y) sum += v;
    const double mean = sum / static_cast<double>(y.size());
    if (!(mean > 0.0)) throw Error(ErrorCode::ZeroNormalizer, "mean observed GHI is zero");
    return mean;
}

const char* to_string(Group g) { return g == Group::HS ? "HS" : "all-in-one"; }

const ModelResult& EvalReport::at(std::string_view label) const {
    for (const auto& m : models)
        if (m.label == label) return m;
    throw Error(ErrorCode::InvalidConfig, "report has no model " + std::string(label));
}

EvalReport build_report(std::span<const double> y, std::span<const Timestamp> targets,
                        const std::vector<ModelForecasts>& models, double normalizer) {
    EvalReport report;
    report.normalizer = normalizer;
    report.samples = y.size();
    for (const auto& m : models) {
        ModelResult r;
        r.label = m.label;
        r.group = m.group;
        r.overall = metrics(y, m.predictions, normalizer);
        r.detail = breakdown(y, m.predictions, targets, normalizer);
        report.models.push_back(std::move(r));
    }

    const ModelResult* best_a = nullptr;
    for (const auto& r : report.models) {
        if (r.group != Group::AllInOne) continue;
        if (!best_a || r.overall.nrmse < best_a->overall.nrmse ||
            (r.overall.nrmse == best_a->overall.nrmse && r.overall.nmae < best_a->overall.nmae))
            best_a = &r;
    }
    auto counterpart = [&](const ModelResult& h) -> const ModelResult* {
        if (h.label == kOptimalLabel) return best_a;
        if (!h.label.ends_with("_h")) return nullptr;
        const std::string want = h.label.substr(0, h.label.size() - 2) + "_a";
        for (const auto& r : report.models)
            if (r.group == Group::AllInOne && r.label == want) return &r;
        return nullptr;
    };
    for (auto& r : report.models) {
        if (r.group != Group::HS) continue;
        if (const auto* a = counterpart(r)) {
            r.imp_a = improvement(a->overall.nmae, r.overall.nmae);
            r.imp_r = improvement(a->overall.nrmse, r.overall.nrmse);
        }
    }
    return report;
}

TestSet make_test_set(const SolarSeries& context, const SolarSeries& targets) {
    TestSet out;
    for (const auto& r : targets.records()) {
        const int h = r.timestamp.hour();
        if (h < hs::kPersistenceSlot || h > hs::kLastSlot) continue;
        const Timestamp needed = h == hs::kPersistenceSlot ? r.timestamp.plus_days(-1) : r.timestamp.plus_hours(-1);
        if (!context.find(needed)) {
            ++out.skipped;
            continue;
        }
        out.targets.push_back(r.timestamp);
        out.ghi.push_back(r.ghi);
    }
    return out;
}

std::vector<ModelForecasts> forecast_groups(const hs::HsForecastSystem& system, const hs::AllInOneGroup& group,
                                            const SolarSeries& context, const TestSet& test) {
    const std::size_t n = test.targets.size();
    const std::size_t nb_h = system.slots.empty() ? 0 : system.slots.begin()->second.by_blender.size();
    const std::size_t nb_a = group.by_blender.size();

    std::vector<ModelForecasts> out;
    out.push_back({kOptimalLabel, Group::HS, std::vector<double>(n)});
    for (std::size_t b = 0; b < nb_h; ++b) {
        const auto& spec = system.slots.begin()->second.by_blender[b].blender_spec();
        out.push_back({spec.name() + "_h", Group::HS, std::vector<double>(n)});
    }
    for (std::size_t b = 0; b < nb_a; ++b)
        out.push_back({group.by_blender[b].blender_spec().name() + "_a", Group::AllInOne, std::vector<double>(n)});
    out.push_back({kPersistenceLabel, Group::AllInOne, std::vector<double>(n)});

    for (std::size_t i = 0; i < n; ++i) {
        const Timestamp target = test.targets[i];
        const int hour = target.hour();
        if (hour == hs::kPersistenceSlot) {
            const double p = hs::forecast_1da(context, target);
            for (auto& m : out) m.predictions[i] = p;
            continue;
        }
        const auto* rec = context.find(target.plus_hours(-1));
        if (!rec) throw Error(ErrorCode::MissingContext, "no issue-time record for " + format_timestamp(target, context.site().utc_offset));

        auto x = features::feature_vector(*rec, context.site(), system.feature_set);
        system.scaler.apply(x);
        const auto& slot = system.slots.at(hour);
        const auto bank_h = slot.by_blender.front().first_layer->forecast(x);
        out[0].predictions[i] = slot.optimal().predict_stacked(bank_h);
        for (std::size_t b = 0; b < nb_h; ++b) out[1 + b].predictions[i] = slot.by_blender[b].predict_stacked(bank_h);

        if (nb_a > 0) {
            auto xa = features::feature_vector(*rec, context.site(), group.feature_set);
            group.scaler.apply(xa);
            const auto bank_a = group.by_blender.front().first_layer->forecast(xa);
            for (std::size_t b = 0; b < nb_a; ++b)
                out[1 + nb_h + b].predictions[i] = group.by_blender[b].predict_stacked(bank_a);
        }
        out.back().predictions[i] = hs::forecast_1ha(context, target);
    }
    return out;
}

Formats Formats::parse(const std::string& list) {
    Formats f{false, false};
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "csv") f.csv = true;
        else if (item == "svg") f.svg = true;
        else throw Error(ErrorCode::InvalidConfig, "unknown report format " + item);
    }
    if (!f.csv && !f.svg) throw Error(ErrorCode::InvalidConfig, "no report format selected");
    return f;
}

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::string opt2(const std::optional<double>& v) { return v ? fixed2(*v) : "NA"; }

// Quotes labels such as "C_opt,h".
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

void write_breakdown_csv(const EvalReport& report, const std::filesystem::path& path, const char* key, bool hours) {
    auto out = open_out(path);
    out << "model,group," << key << ",nmae,nrmse\n";
    for (const auto& m : report.models) {
        const auto& table = hours ? m.detail.by_hour : m.detail.by_month;
        for (const auto& [k, v] : table)
            out << csv_field(m.label) << ',' << to_string(m.group) << ',' << k << ',' << fixed2(v.nmae) << ',' << fixed2(v.nrmse) << '\n';
    }
    finish(out, path);
}

// Models drawn in the charts: the best of each group and the best single
// blender of each group.
std::vector<const ModelResult*> chart_models(const EvalReport& report) {
    const ModelResult* best_hs_blender = nullptr;
    const ModelResult* best_a_blender = nullptr;
    const ModelResult* opt = nullptr;
    const ModelResult* persistence = nullptr;
    for (const auto& m : report.models) {
        if (m.label == kOptimalLabel) opt = &m;
        else if (m.label == kPersistenceLabel) persistence = &m;
        else {
            auto& slot = m.group == Group::HS ? best_hs_blender : best_a_blender;
            if (!slot || m.overall.nrmse < slot->overall.nrmse) slot = &m;
        }
    }
    std::vector<const ModelResult*> out;
    for (const auto* m : {opt, best_hs_blender, persistence, best_a_blender})
        if (m) out.push_back(m);
    return out;
}

void write_chart(const EvalReport& report, const std::filesystem::path& path, bool hours) {
    constexpr double panel_w = 420, panel_h = 260, left = 50, top = 30, gap = 60;
    constexpr const char* colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a"};
    const auto models = chart_models(report);

    std::vector<int> keys;
    double ymax = 0.0;
    for (const auto* m : models) {
        for (const auto& [k, v] : hours ? m->detail.by_hour : m->detail.by_month) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
            ymax = std::max({ymax, v.nmae, v.nrmse});
        }
    }
    std::sort(keys.begin(), keys.end());
    ymax = ymax > 0.0 ? std::ceil(ymax / 5.0) * 5.0 : 1.0;
    const double span = keys.size() > 1 ? static_cast<double>(keys.size() - 1) : 1.0;

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed2(2 * panel_w + 2 * left + gap) << "\" height=\""
        << fixed2(panel_h + top + 90) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int panel = 0; panel < 2; ++panel) {
        const double x0 = left + panel * (panel_w + gap);
        out << "<text x=\"" << fixed2(x0 + panel_w / 2) << "\" y=\"18\" text-anchor=\"middle\">"
            << (panel == 0 ? "nMAE (%)" : "nRMSE (%)") << "</text>\n";
        out << "<rect x=\"" << fixed2(x0) << "\" y=\"" << fixed2(top) << "\" width=\"" << fixed2(panel_w)
            << "\" height=\"" << fixed2(panel_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (int t = 0; t <= 5; ++t) {
            const double v = ymax * t / 5.0;
            const double y = top + panel_h - panel_h * t / 5.0;
            out << "<text x=\"" << fixed2(x0 - 6) << "\" y=\"" << fixed2(y + 4) << "\" text-anchor=\"end\">" << fixed2(v)
                << "</text>\n";
        }
        for (std::size_t i = 0; i < keys.size(); ++i) {
            const double x = x0 + panel_w * static_cast<double>(i) / span;
            out << "<text x=\"" << fixed2(x) << "\" y=\"" << fixed2(top + panel_h + 16) << "\" text-anchor=\"middle\">"
                << keys[i] << "</text>\n";
        }
        for (std::size_t mi = 0; mi < models.size(); ++mi) {
            out << "<polyline fill=\"none\" stroke=\"" << colors[mi % 4] << "\" stroke-width=\"1.5\" points=\"";
            const auto& table = hours ? models[mi]->detail.by_hour : models[mi]->detail.by_month;
            for (std::size_t i = 0; i < keys.size(); ++i) {
                const auto it = table.find(keys[i]);
                if (it == table.end()) continue;
                const double v = panel == 0 ? it->second.nmae : it->second.nrmse;
                out << fixed2(x0 + panel_w * static_cast<double>(i) / span) << ',' << fixed2(top + panel_h - panel_h * v / ymax)
                    << ' ';
            }
            out << "\"/>\n";
        }
    }
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        const double x = left + 140.0 * static_cast<double>(mi);
        const double y = top + panel_h + 50;
        out << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(y) << "\" x2=\"" << fixed2(x + 20) << "\" y2=\"" << fixed2(y)
            << "\" stroke=\"" << colors[mi % 4] << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fixed2(x + 26) << "\" y=\"" << fixed2(y + 4) << "\">" << models[mi]->label << "</text>\n";
    }
    out << "<text x=\"" << fixed2(left + panel_w + gap / 2) << "\" y=\"" << fixed2(top + panel_h + 32)
        << "\" text-anchor=\"middle\">" << (hours ? "target hour" : "month") << "</text>\n";
    out << "</svg>\n";
    finish(out, path);
}

} // namespace

void emit_report(const EvalReport& report, const std::filesystem::path& out_dir, const Formats& formats) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());

    if (formats.csv) {
        const auto path = out_dir / "overall.csv";
        auto out = open_out(path);
        out << "model,group,nmae,nrmse,imp_a,imp_r\n";
        for (const auto& m : report.models)
            out << csv_field(m.label) << ',' << to_string(m.group) << ',' << fixed2(m.overall.nmae) << ',' << fixed2(m.overall.nrmse)
                << ',' << opt2(m.imp_a) << ',' << opt2(m.imp_r) << '\n';
        finish(out, path);
        write_breakdown_csv(report, out_dir / "by_hour.csv", "hour", true);
        write_breakdown_csv(report, out_dir / "by_month.csv", "month", false);

        const auto meta_path = out_dir / "normalizer.csv";
        auto meta = open_out(meta_path);
        meta << "normalizer_wm2,samples\n" << fixed2(report.normalizer) << ',' << report.samples << '\n';
        finish(meta, meta_path);
    }
    if (formats.svg) {
        write_chart(report, out_dir / "by_hour.svg", true);
        write_chart(report, out_dir / "by_month.svg", false);
    }
}

} // namespace hsf::eval
