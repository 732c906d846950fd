#include "hsf/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "hsf/evaluation.hpp"
#include "hsf/features.hpp"
#include "hsf/hs.hpp"
#include "hsf/ingest.hpp"
#include "hsf/rng.hpp"
#include "hsf/serialize.hpp"

namespace fs = std::filesystem;

namespace hsf::cli {

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::IoFailure:
    case ErrorCode::ModelNotFound:
    case ErrorCode::FormatError:
    case ErrorCode::InputMismatch:
    case ErrorCode::OutOfWindow:
        return kUsageError;
    default:
        return kDataError;
    }
}

namespace {

using Values = std::map<std::string, std::string>;

const Values kDefaults = {
    {"site", "39.74,-105.18,1828.8,-7"},
    {"k_folds", "10"},
    {"train_fraction", "0.75"},
    {"normalizer", "mean"},
    {"jobs", "1"},
    {"ghi_only", "false"},
    {"formats", "csv"},
    {"split", "sample"},
};

const std::set<std::string> kRunKeys = {"input",  "site",    "seed",       "k_folds",   "train_fraction",
                                        "normalizer", "jobs", "ghi_only",  "out_dir",   "formats",
                                        "model_dir", "histograms", "split", "issue_time", "output"};

bool is_synth_key(const std::string& key) {
    return key == "n_days" || key == "day_persistence" || key == "sky_noise" || key == "start_date" ||
           key.starts_with("csi_");
}

/// Resolved settings for one command.
struct RunConfig {
    Values values;
    Values synth_keys;

    bool has(const std::string& key) const { return values.contains(key) && !values.at(key).empty(); }

    const std::string& text(const std::string& key) const {
        if (!has(key)) throw Error(ErrorCode::InvalidConfig, "--" + flag_name(key) + " is required");
        return values.at(key);
    }

    static std::string flag_name(std::string key) {
        for (auto& c : key)
            if (c == '_') c = '-';
        return key;
    }

    double number(const std::string& key) const {
        const auto& v = text(key);
        std::size_t used = 0;
        double out = 0.0;
        try {
            out = std::stod(v, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != v.size() || !std::isfinite(out))
            throw Error(ErrorCode::InvalidConfig, "--" + flag_name(key) + " expects a number, got " + v);
        return out;
    }

    std::uint64_t unsigned_integer(const std::string& key) const {
        const auto& v = text(key);
        std::uint64_t out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size())
            throw Error(ErrorCode::InvalidConfig, "--" + flag_name(key) + " expects a non-negative integer, got " + v);
        return out;
    }

    bool flag(const std::string& key) const {
        if (!has(key)) return false;
        const auto& v = values.at(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw Error(ErrorCode::InvalidConfig, key + " expects true or false");
    }

    std::uint64_t seed() const {
        if (!has("seed")) throw Error(ErrorCode::InvalidConfig, "--seed is required");
        return unsigned_integer("seed");
    }

    solar::SiteConfig site() const {
        std::vector<double> parts;
        std::stringstream ss(text("site"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(item, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != item.size()) throw Error(ErrorCode::InvalidConfig, "--site expects lat,lon,elev,utc");
            parts.push_back(v);
        }
        if (parts.size() != 4) throw Error(ErrorCode::InvalidConfig, "--site expects lat,lon,elev,utc");
        solar::SiteConfig s{parts[0], parts[1], parts[2], parts[3]};
        s.validate();
        return s;
    }

    features::FeatureSet feature_set() const {
        return flag("ghi_only") ? features::FeatureSet::GhiOnly : features::FeatureSet::Full;
    }

    SplitSpec split_spec() const {
        SplitSpec spec;
        spec.train_fraction = number("train_fraction");
        spec.seed = seed();
        const auto& g = text("split");
        if (g == "sample") spec.granularity = SplitGranularity::Sample;
        else if (g == "day") spec.granularity = SplitGranularity::Day;
        else throw Error(ErrorCode::InvalidConfig, "--split expects sample or day");
        spec.validate();
        return spec;
    }

    mmff::TrainOptions train_options() const {
        mmff::TrainOptions o;
        o.k_folds = unsigned_integer("k_folds");
        o.jobs = static_cast<unsigned>(unsigned_integer("jobs"));
        if (o.k_folds < 2) throw Error(ErrorCode::InvalidConfig, "--k-folds must be at least 2");
        if (o.jobs < 1) throw Error(ErrorCode::InvalidConfig, "--jobs must be at least 1");
        return o;
    }
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string content_hash(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_tag(bytes)));
    return buf;
}

SolarSeries load_series(const RunConfig& cfg) {
    const auto site = cfg.site();
    std::istringstream in(read_file(cfg.text("input")));
    CsvSchema schema;
    schema.ghi_only = cfg.flag("ghi_only") || cfg.has("histograms");
    auto series = parse_csv(in, site, schema);
    if (cfg.has("histograms")) {
        std::istringstream hist(read_file(cfg.text("histograms")));
        series = features::attach_sky_stats(series, features::read_histogram_csv(hist, site.utc_offset));
    }
    return series.with_clear_sky();
}

struct Prepared {
    SolarSeries context;  // day-windowed full series
    SplitResult split;
};

Prepared prepare(const RunConfig& cfg) {
    Prepared p;
    p.context = apply_day_window(load_series(cfg));
    p.split = stratified_split(p.context, cfg.split_spec());
    return p;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

std::string slots_csv(const hs::HsForecastSystem& system) {
    std::ostringstream out;
    out << "slot,winner,cv_nmae,cv_nrmse\n";
    for (const auto& r : system.report()) {
        out << r.target_hour << ',' << r.winner << ',' << (r.cv_nmae ? eval::fixed2(*r.cv_nmae) : "NA") << ','
            << (r.cv_nrmse ? eval::fixed2(*r.cv_nrmse) : "NA") << '\n';
    }
    return out.str();
}

// Settings recorded at train time and reused by evaluate/forecast.
constexpr const char* kManifestKeys[] = {"site", "seed", "k_folds", "train_fraction", "ghi_only", "split"};

// --- commands ---------------------------------------------------------------

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
    SynthConfig sc;
    sc.site = cfg.site();
    apply_synth_keys(sc, cfg.synth_keys);
    if (cfg.has("n_days")) sc.n_days = static_cast<int>(cfg.unsigned_integer("n_days"));
    sc.seed = cfg.seed();
    sc.validate();
    const auto series = generate_synthetic(sc);
    const fs::path path = cfg.text("output");
    std::ostringstream csv;
    write_csv(csv, series);
    write_text(path, csv.str());
    out << "wrote " << series.size() << " records to " << path.string() << '\n';
    return kOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    const auto series = load_series(cfg);
    const auto windowed = apply_day_window(series);
    std::set<std::int64_t> days;
    for (const auto& r : windowed.records()) days.insert(r.timestamp.day_index());
    const double utc = series.site().utc_offset;
    out << "records: " << series.size() << '\n'
        << "first: " << format_timestamp(series.records().front().timestamp, utc) << '\n'
        << "last: " << format_timestamp(series.records().back().timestamp, utc) << '\n'
        << "records 7..19: " << windowed.size() << " over " << days.size() << " days\n"
        << "feature set: " << (cfg.feature_set() == features::FeatureSet::Full ? "full" : "ghi-only") << '\n';
    return kOk;
}

int cmd_characterize(const RunConfig& cfg, std::ostream& out) {
    const auto windowed = apply_day_window(load_series(cfg));
    const auto set = cfg.feature_set();
    const auto names = features::feature_names(set);
    std::vector<std::vector<double>> columns(names.size());
    for (const auto& r : windowed.records()) {
        const auto x = features::feature_vector(r, windowed.site(), set);
        for (std::size_t j = 0; j < x.size(); ++j) columns[j].push_back(x[j]);
    }
    std::ostringstream csv;
    csv << "feature,periodicity,trend,seasonality\n";
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto c = features::characterize(columns[j]);
        csv << names[j] << ',' << c.periodicity << ',' << eval::fixed2(c.trend) << ',' << eval::fixed2(c.seasonality) << '\n';
    }
    if (cfg.has("output")) write_text(cfg.text("output"), csv.str());
    else out << csv.str();
    return kOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
    const fs::path model_dir = cfg.text("model_dir");
    const auto options = cfg.train_options();
    const std::uint64_t seed = cfg.seed();
    const std::string input_bytes = read_file(cfg.text("input"));
    const auto p = prepare(cfg);
    const auto set = cfg.feature_set();
    const auto train = features::build_supervised_for_targets(p.context, p.split.train, set);
    const auto pool = learners::default_pool();

    auto system = hs::train_hs(train, pool, options, seed, p.context.site());
    system.persistence_score = hs::score_1da(p.context, p.split.train);
    const auto group = hs::train_all_in_one_group(train, pool, options, seed);

    ensure_dir(model_dir);
    io::write_json(model_dir / "hs_system.json", io::to_json(system));
    io::write_json(model_dir / "all_in_one.json", io::to_json(group));

    io::Json manifest = {{"format", "hsf-manifest"},
                         {"version", io::kFormatVersion},
                         {"input", fs::absolute(cfg.text("input")).string()},
                         {"input_hash", content_hash(input_bytes)},
                         {"train_rows", train.size()},
                         {"test_records", p.split.test.size()}};
    if (cfg.has("histograms")) {
        manifest["histograms"] = fs::absolute(cfg.text("histograms")).string();
        manifest["histograms_hash"] = content_hash(read_file(cfg.text("histograms")));
    }
    io::Json settings = io::Json::object();
    for (const char* key : kManifestKeys) settings[key] = cfg.values.at(key);
    manifest["settings"] = settings;
    io::write_json(model_dir / "manifest.json", manifest);

    const auto slots = slots_csv(system);
    write_text(model_dir / "slots.csv", slots);
    out << "trained " << system.slots.size() << " slot models and " << group.by_blender.size()
        << " all-in-one models on " << train.size() << " rows\n"
        << slots;
    return kOk;
}

// Loads the trained artifacts and re-derives the data settings they were trained with.
struct Loaded {
    RunConfig cfg;
    hs::HsForecastSystem system;
    hs::AllInOneGroup group;
    std::string slots;
};

Loaded load_models(const RunConfig& cfg) {
    const fs::path dir = cfg.text("model_dir");
    const auto manifest = io::read_json(dir / "manifest.json");
    Loaded l;
    l.cfg = cfg;
    try {
        if (manifest.at("format") != "hsf-manifest" || manifest.at("version") != io::kFormatVersion)
            throw Error(ErrorCode::FormatError, "unsupported manifest");
        for (const auto& [key, value] : manifest.at("settings").items()) l.cfg.values[key] = value.get<std::string>();
        if (!cfg.has("input")) l.cfg.values["input"] = manifest.at("input").get<std::string>();
        if (manifest.contains("histograms")) {
            if (!cfg.has("histograms")) l.cfg.values["histograms"] = manifest.at("histograms").get<std::string>();
        }
    } catch (const io::Json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("manifest: ") + e.what());
    }
    if (content_hash(read_file(l.cfg.text("input"))) != manifest.at("input_hash").get<std::string>())
        throw Error(ErrorCode::InputMismatch, l.cfg.text("input") + " differs from the training input");
    l.system = io::system_from_json(io::read_json(dir / "hs_system.json"));
    l.group = io::group_from_json(io::read_json(dir / "all_in_one.json"));
    l.slots = read_file(dir / "slots.csv");
    return l;
}

eval::EvalReport evaluate_models(const Loaded& l) {
    const auto p = prepare(l.cfg);
    const auto test = eval::make_test_set(p.context, p.split.test);
    if (test.targets.empty()) throw Error(ErrorCode::EmptyInput, "no test targets with forecast inputs");
    const auto forecasts = eval::forecast_groups(l.system, l.group, p.context, test);
    const double normalizer = eval::Normalizer::parse(l.cfg.text("normalizer")).resolve(test.ghi);
    return eval::build_report(test.ghi, test.targets, forecasts, normalizer);
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    const auto formats = eval::Formats::parse(cfg.text("formats"));
    eval::Normalizer::parse(cfg.text("normalizer"));
    const auto l = load_models(cfg);
    const fs::path out_dir = cfg.has("out_dir") ? fs::path(cfg.text("out_dir")) : fs::path(cfg.text("model_dir")) / "report";
    const auto report = evaluate_models(l);
    eval::emit_report(report, out_dir, formats);
    write_text(out_dir / "slots.csv", l.slots);
    out << "evaluated " << report.models.size() << " models on " << report.samples << " targets; report in "
        << out_dir.string() << '\n';
    return kOk;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
    eval::Normalizer::parse(cfg.text("normalizer"));
    const auto report = evaluate_models(load_models(cfg));
    out << std::left << std::setw(12) << "model" << std::setw(12) << "group" << std::right << std::setw(8) << "nMAE"
        << std::setw(8) << "nRMSE" << std::setw(8) << "ImpA" << std::setw(8) << "ImpR" << '\n';
    for (const auto& m : report.models) {
        out << std::left << std::setw(12) << m.label << std::setw(12) << eval::to_string(m.group) << std::right
            << std::setw(8) << eval::fixed2(m.overall.nmae) << std::setw(8) << eval::fixed2(m.overall.nrmse) << std::setw(8)
            << (m.imp_a ? eval::fixed2(*m.imp_a) : "NA") << std::setw(8) << (m.imp_r ? eval::fixed2(*m.imp_r) : "NA")
            << '\n';
    }
    out << "normalizer " << eval::fixed2(report.normalizer) << " W/m^2 over " << report.samples << " targets\n";
    return kOk;
}

int cmd_forecast(const RunConfig& cfg, std::ostream& out) {
    const fs::path dir = cfg.text("model_dir");
    const auto system = io::system_from_json(io::read_json(dir / "hs_system.json"));
    RunConfig data_cfg = cfg;
    data_cfg.values["ghi_only"] = system.feature_set == features::FeatureSet::GhiOnly ? "true" : "false";
    if (!cfg.has("histograms")) {
        const auto manifest = io::read_json(dir / "manifest.json");
        if (manifest.contains("histograms")) data_cfg.values["histograms"] = manifest.at("histograms").get<std::string>();
    }
    std::ostringstream site;
    site << std::setprecision(17) << system.site.latitude << ',' << system.site.longitude << ',' << system.site.elevation
         << ',' << system.site.utc_offset;
    data_cfg.values["site"] = site.str();
    const auto context = load_series(data_cfg);
    const Timestamp issue = parse_timestamp(cfg.text("issue_time"), system.site.utc_offset);
    const auto f = hs::forecast(system, context, issue);
    out << format_timestamp(f.target_time, system.site.utc_offset) << ", " << eval::fixed2(f.ghi) << '\n';
    return kOk;
}

// --- parsing ----------------------------------------------------------------

struct Command {
    CLI::App* app = nullptr;
    std::map<std::string, CLI::Option*> options;
    int (*run)(const RunConfig&, std::ostream&) = nullptr;
};

class Parser {
public:
    Parser() : app_("Hourly-similarity GHI forecasting") {
        app_.require_subcommand(1);
        app_.set_help_all_flag("--help-all");

        add("synth", "Generate a synthetic solar year", cmd_synth, {"output", "seed", "site", "n_days"});
        add("validate", "Check an input CSV", cmd_validate, {"input", "site", "ghi_only", "histograms"});
        add("characterize", "Periodicity, trend and seasonality per feature", cmd_characterize,
            {"input", "site", "ghi_only", "histograms", "output"});
        add("train", "Train the HS system and the all-in-one group", cmd_train,
            {"input", "site", "seed", "k_folds", "train_fraction", "jobs", "ghi_only", "histograms", "split", "model_dir"});
        add("evaluate", "Score both groups on the test split", cmd_evaluate,
            {"model_dir", "input", "histograms", "normalizer", "out_dir", "formats"});
        add("compare", "Print the overall comparison table", cmd_compare, {"model_dir", "input", "histograms", "normalizer"});
        add("forecast", "One-hour-ahead forecast for an issue time", cmd_forecast,
            {"model_dir", "input", "histograms", "issue_time"});
    }

    int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
        std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
        std::reverse(reversed.begin(), reversed.end());
        try {
            app_.parse(reversed);
        } catch (const CLI::ParseError& e) {
            const int code = app_.exit(e, out, err);
            return code == 0 ? kOk : kUsageError;
        }
        for (const auto& cmd : commands_) {
            if (!cmd.app->parsed()) continue;
            const RunConfig cfg = resolve(cmd);
            return cmd.run(cfg, out);
        }
        return kUsageError;
    }

private:
    void add(const char* name, const char* help, int (*fn)(const RunConfig&, std::ostream&),
             std::initializer_list<const char*> keys) {
        Command cmd;
        cmd.app = app_.add_subcommand(name, help);
        cmd.run = fn;
        for (const char* key : keys) cmd.options[key] = add_option(*cmd.app, key);
        cmd.app->add_option("--config", config_path_, "key = value settings file");
        commands_.push_back(cmd);
    }

    CLI::Option* add_option(CLI::App& app, const std::string& key) {
        const std::string flag = "--" + RunConfig::flag_name(key);
        if (key == "ghi_only") return app.add_flag(flag, "Use only (GHI, GHI_clr, CSI) as inputs");
        static const std::map<std::string, std::string> help = {
            {"input", "Input CSV (timestamp,ghi[,ghi_clr][,mu,sigma,entropy])"},
            {"site", "Site as lat,lon,elev,utc"},
            {"seed", "Random seed (required)"},
            {"k_folds", "Cross-validation folds"},
            {"train_fraction", "Training share of each month"},
            {"normalizer", "mean or capacity:<W/m^2>"},
            {"jobs", "Worker threads"},
            {"out_dir", "Report directory"},
            {"formats", "Comma list of csv,svg"},
            {"model_dir", "Model directory"},
            {"histograms", "Sky-image histogram CSV (timestamp,bin counts...)"},
            {"split", "Split unit: sample or day"},
            {"issue_time", "Issue time YYYY-MM-DDTHH:MM[:SS][offset]"},
            {"output", "Output file"},
            {"n_days", "Days to synthesize"},
        };
        return app.add_option(flag, raw_[key], help.at(key));
    }

    RunConfig resolve(const Command& cmd) const {
        RunConfig cfg;
        cfg.values = kDefaults;
        if (!config_path_.empty()) {
            std::istringstream in(read_file(config_path_));
            for (const auto& [key, value] : read_key_values(in)) {
                if (is_synth_key(key)) cfg.synth_keys[key] = value;
                else if (kRunKeys.contains(key)) cfg.values[key] = value;
                else throw Error(ErrorCode::InvalidConfig, "unknown config key " + key);
            }
        }
        for (const auto& [key, opt] : cmd.options) {
            if (opt->count() == 0) continue;
            cfg.values[key] = key == "ghi_only" ? "true" : raw_.at(key);
        }
        return cfg;
    }

    CLI::App app_;
    std::vector<Command> commands_;
    std::map<std::string, std::string> raw_;
    std::string config_path_;
};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        Parser parser;
        return parser.run(args, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
}

} // namespace hsf::cli
