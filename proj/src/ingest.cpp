#include "hsf/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hsf/error.hpp"
#include "hsf/rng.hpp"

namespace hsf {

SolarSeries::SolarSeries(solar::SiteConfig site, std::vector<SolarRecord> records)
    : site_(site), records_(std::move(records)) {
    for (std::size_t i = 1; i < records_.size(); ++i) {
        if (!(records_[i - 1].timestamp < records_[i].timestamp)) {
            throw Error(ErrorCode::NonMonotoneTimestamps,
                        "record " + std::to_string(i + 1) + " does not follow its predecessor");
        }
    }
}

const SolarRecord* SolarSeries::find(Timestamp t) const {
    auto it = std::lower_bound(records_.begin(), records_.end(), t,
                               [](const SolarRecord& r, Timestamp ts) { return r.timestamp < ts; });
    if (it == records_.end() || it->timestamp != t) return nullptr;
    return &*it;
}

SolarSeries SolarSeries::with_clear_sky() const {
    auto out = *this;
    for (auto& r : out.records_) {
        if (!r.ghi_clr) r.ghi_clr = solar::clear_sky(r.timestamp, site_).ghi_clr;
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
            field.remove_suffix(1);
        out.push_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view field, long long row, const char* column) {
    if (field.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::MalformedRow, std::string("column ") + column + " is not a finite number", row);
    }
    return v;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

SolarSeries parse_csv(std::istream& in, const solar::SiteConfig& site, const CsvSchema& schema) {
    site.validate();
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::EmptyInput, "no header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM

    const auto header = split_fields(line);
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    };
    const auto c_ts = column(schema.timestamp);
    const auto c_ghi = column(schema.ghi);
    if (!c_ts || !c_ghi) throw Error(ErrorCode::FormatError, "header must contain timestamp and ghi columns");
    const auto c_clr = column(schema.ghi_clr);
    const auto c_mu = column(schema.mu);
    const auto c_sigma = column(schema.sigma);
    const auto c_entropy = column(schema.entropy);

    std::vector<SolarRecord> records;
    long long row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto f = split_fields(line);
        if (f.size() != header.size()) throw Error(ErrorCode::MalformedRow, "wrong number of fields", row);
        SolarRecord r;
        try {
            r.timestamp = parse_timestamp(f[*c_ts], site.utc_offset);
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedRow, e.what(), row);
        }
        const auto ghi = parse_number(f[*c_ghi], row, "ghi");
        if (!ghi) throw Error(ErrorCode::MalformedRow, "ghi is empty", row);
        if (*ghi < 0.0) throw Error(ErrorCode::MalformedRow, "ghi < 0", row);
        r.ghi = *ghi;
        if (c_clr) {
            r.ghi_clr = parse_number(f[*c_clr], row, "ghi_clr");
            if (r.ghi_clr && *r.ghi_clr < 0.0) throw Error(ErrorCode::MalformedRow, "ghi_clr < 0", row);
        }
        if (c_mu) r.mu = parse_number(f[*c_mu], row, "mu");
        if (c_sigma) r.sigma = parse_number(f[*c_sigma], row, "sigma");
        if (c_entropy) r.entropy = parse_number(f[*c_entropy], row, "entropy");
        if (r.mu && (*r.mu < 0.0 || *r.mu > 1.0)) throw Error(ErrorCode::MalformedRow, "mu outside [0,1]", row);
        if (r.sigma && *r.sigma < 0.0) throw Error(ErrorCode::MalformedRow, "sigma < 0", row);
        if (r.entropy && *r.entropy < 0.0) throw Error(ErrorCode::MalformedRow, "entropy < 0", row);
        if (!schema.ghi_only && !r.has_sky_stats()) {
            throw Error(ErrorCode::MalformedRow, "missing mu/sigma/entropy (use GHI-only mode)", row);
        }
        if (!records.empty() && !(records.back().timestamp < r.timestamp)) {
            throw Error(ErrorCode::NonMonotoneTimestamps, "at data row " + std::to_string(row));
        }
        records.push_back(r);
    }
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "no data rows");
    return SolarSeries(site, std::move(records));
}

void write_csv(std::ostream& out, const SolarSeries& series) {
    out << "timestamp,ghi,ghi_clr,mu,sigma,entropy\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : series.records()) {
        out << format_timestamp(r.timestamp, series.site().utc_offset) << ',' << format_double(r.ghi) << ','
            << opt(r.ghi_clr) << ',' << opt(r.mu) << ',' << opt(r.sigma) << ',' << opt(r.entropy) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Windowing and splitting

SolarSeries apply_day_window(const SolarSeries& series, int start_hour, int end_hour) {
    std::vector<SolarRecord> kept;
    for (const auto& r : series.records()) {
        const int h = r.timestamp.hour();
        if (h >= start_hour && h <= end_hour) kept.push_back(r);
    }
    return SolarSeries(series.site(), std::move(kept));
}

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "train_fraction must lie in (0, 1)");
    }
}

SplitResult stratified_split(const SolarSeries& series, const SplitSpec& spec) {
    spec.validate();
    if (series.empty()) throw Error(ErrorCode::EmptyInput, "cannot split an empty series");

    // Group record indices into units (records or days), units into months.
    std::map<long long, std::vector<std::vector<std::size_t>>> months;
    std::map<long long, std::size_t> day_slot;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto c = series[i].timestamp.civil();
        const long long month_key = c.year * 12LL + (c.month - 1);
        auto& units = months[month_key];
        if (spec.granularity == SplitGranularity::Sample) {
            units.push_back({i});
        } else {
            const auto day = series[i].timestamp.day_index();
            auto [it, inserted] = day_slot.try_emplace(day, units.size());
            if (inserted) units.emplace_back();
            units[it->second].push_back(i);
        }
    }

    std::vector<char> is_train(series.size(), 0);
    const SeedPath root = SeedPath(spec.seed).child("split");
    for (auto& [month_key, units] : months) {
        std::vector<std::size_t> order(units.size());
        for (std::size_t u = 0; u < order.size(); ++u) order[u] = u;
        auto rng = root.child(static_cast<std::uint64_t>(month_key)).engine();
        shuffle(order.begin(), order.end(), rng);
        const auto n_train =
            static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(units.size()) + 0.5));
        for (std::size_t k = 0; k < n_train && k < order.size(); ++k)
            for (auto idx : units[order[k]]) is_train[idx] = 1;
    }

    std::vector<SolarRecord> train, test;
    for (std::size_t i = 0; i < series.size(); ++i) (is_train[i] ? train : test).push_back(series[i]);
    return {SolarSeries(series.site(), std::move(train)), SolarSeries(series.site(), std::move(test))};
}

// ---------------------------------------------------------------------------
// Synthetic data

std::array<CsiRegime, 13> SynthConfig::default_regimes() {
    return {{
        {0.80, 0.25, 0.50},  // 7
        {0.86, 0.18, 0.85},  // 8
        {0.88, 0.15, 0.90},  // 9
        {0.85, 0.16, 0.85},  // 10
        {0.80, 0.20, 0.75},  // 11
        {0.72, 0.25, 0.65},  // 12
        {0.62, 0.30, 0.55},  // 13
        {0.55, 0.30, 0.50},  // 14
        {0.52, 0.28, 0.50},  // 15
        {0.58, 0.25, 0.60},  // 16
        {0.65, 0.22, 0.70},  // 17
        {0.72, 0.22, 0.75},  // 18
        {0.75, 0.25, 0.75},  // 19
    }};
}

void SynthConfig::validate() const {
    site.validate();
    if (n_days < 1) throw Error(ErrorCode::InvalidConfig, "n_days must be >= 1");
    if (!(day_persistence >= 0.0 && day_persistence < 1.0))
        throw Error(ErrorCode::InvalidConfig, "day_persistence must lie in [0, 1)");
    for (const auto& r : csi_regimes) {
        if (!(r.persistence >= 0.0 && r.persistence < 1.0))
            throw Error(ErrorCode::InvalidConfig, "AR(1) persistence must lie in [0, 1)");
        if (!(r.stddev >= 0.0) || !std::isfinite(r.mean)) throw Error(ErrorCode::InvalidConfig, "bad CSI regime");
    }
    try {
        (void)Timestamp::from_civil(start_date);
    } catch (...) {
        throw Error(ErrorCode::InvalidConfig, "bad start_date");
    }
}

SolarSeries generate_synthetic(const SynthConfig& config) {
    config.validate();
    const auto& cp = config.sky_coupling;
    auto csi_rng = SeedPath(config.seed).child("synth-csi").engine();
    auto sky_rng = SeedPath(config.seed).child("synth-sky").engine();

    CivilTime start = config.start_date;
    start.hour = start.minute = start.second = 0;
    const Timestamp day0 = Timestamp::from_civil(start);

    std::vector<SolarRecord> records;
    records.reserve(static_cast<std::size_t>(config.n_days) * 13);
    double morning_dev = 0.0;
    for (int d = 0; d < config.n_days; ++d) {
        double dev = 0.0;
        for (int k = 0; k < 13; ++k) {
            const auto& reg = config.csi_regimes[k];
            if (k == 0) {
                const double phi = config.day_persistence;
                morning_dev = phi * morning_dev + reg.stddev * std::sqrt(1.0 - phi * phi) * standard_normal(csi_rng);
                dev = morning_dev;
            } else {
                const auto& prev = config.csi_regimes[k - 1];
                const double phi = reg.persistence;
                const double rescale = prev.stddev > 0.0 ? reg.stddev / prev.stddev : 0.0;
                dev = phi * dev * rescale + reg.stddev * std::sqrt(1.0 - phi * phi) * standard_normal(csi_rng);
            }
            const double csi = std::clamp(reg.mean + dev, 0.0, solar::kCsiMax);

            SolarRecord r;
            r.timestamp = day0.plus_days(d).plus_hours(7 + k);
            const double clr = solar::clear_sky(r.timestamp, config.site).ghi_clr;
            r.ghi_clr = clr;
            r.ghi = csi * clr;

            const double cloud = 1.0 - std::min(csi, 1.0);
            auto noise = [&](double scale) { return config.sky_noise ? scale * standard_normal(sky_rng) : 0.0; };
            r.mu = std::clamp(cp.mu_base + cp.mu_slope * cloud + noise(cp.mu_noise), 0.0, 1.0);
            r.sigma = std::max(0.0, cp.sigma_base + cp.sigma_slope * cloud + noise(cp.sigma_noise));
            r.entropy = std::clamp(cp.entropy_base + cp.entropy_slope * cloud + noise(cp.entropy_noise), 0.0,
                                   std::log(256.0));
            records.push_back(r);
        }
    }
    return SolarSeries(config.site, std::move(records));
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    long long n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(n) + " lacks '='");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

namespace {

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        throw Error(ErrorCode::InvalidConfig, key + " expects a number");
    return out;
}

} // namespace

void apply_synth_keys(SynthConfig& config, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "n_days") {
            config.n_days = static_cast<int>(to_double(key, value));
        } else if (key == "seed") {
            config.seed = static_cast<std::uint64_t>(to_double(key, value));
        } else if (key == "day_persistence") {
            config.day_persistence = to_double(key, value);
        } else if (key == "sky_noise") {
            config.sky_noise = value == "true" || value == "1";
        } else if (key == "start_date") {
            int y = 0, m = 0, d = 0;
            if (std::sscanf(value.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
                throw Error(ErrorCode::InvalidConfig, "start_date expects YYYY-MM-DD");
            config.start_date = {y, m, d, 0, 0, 0};
        } else if (key.rfind("csi_", 0) == 0) {
            const auto us = key.rfind('_');
            const int hour = static_cast<int>(to_double(key, key.substr(us + 1)));
            if (hour < 7 || hour > 19) throw Error(ErrorCode::InvalidConfig, key + ": hour outside 7..19");
            auto& reg = config.csi_regimes[static_cast<std::size_t>(hour - 7)];
            const auto field = key.substr(4, us - 4);
            if (field == "mean") reg.mean = to_double(key, value);
            else if (field == "std") reg.stddev = to_double(key, value);
            else if (field == "phi") reg.persistence = to_double(key, value);
            else throw Error(ErrorCode::InvalidConfig, "unknown key " + key);
        } else {
            throw Error(ErrorCode::InvalidConfig, "unknown key " + key);
        }
    }
    config.validate();
}

} // namespace hsf
