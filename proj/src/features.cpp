#include "hsf/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>

#include "hsf/error.hpp"

namespace hsf::features {

SkyStats sky_stats_from_histogram(std::span<const double> counts, double alpha) {
    if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha))
        throw Error(ErrorCode::InvalidAlpha, "alpha must be positive and != 1");
    double total = 0.0;
    for (double c : counts) {
        if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorCode::EmptyHistogram, "counts must be finite and >= 0");
        total += c;
    }
    if (counts.empty() || !(total > 0.0)) throw Error(ErrorCode::EmptyHistogram, "histogram has no mass");

    const auto n = static_cast<double>(counts.size());
    SkyStats s;
    double power_sum = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double p = counts[i] / total;
        s.mu += p * (static_cast<double>(i) + 0.5) / n;
        if (p > 0.0) power_sum += std::pow(p, alpha);
    }
    double var = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double d = (static_cast<double>(i) + 0.5) / n - s.mu;
        var += counts[i] / total * d * d;
    }
    s.sigma = std::sqrt(var);
    s.entropy = std::max(0.0, std::log(power_sum) / (1.0 - alpha));
    return s;
}

std::map<Timestamp, SkyStats> read_histogram_csv(std::istream& in, double site_utc_offset_hours, double alpha) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::EmptyInput, "histogram file has no header");
    std::map<Timestamp, SkyStats> out;
    long long row = 0;
    std::vector<double> counts;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        counts.clear();
        std::size_t start = 0;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(ErrorCode::MalformedRow, "no bins", row);
        Timestamp ts;
        try {
            ts = parse_timestamp(std::string_view(line).substr(0, comma), site_utc_offset_hours);
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedRow, e.what(), row);
        }
        start = comma + 1;
        while (start <= line.size()) {
            auto end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            std::string_view f(line.data() + start, end - start);
            while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.remove_suffix(1);
            while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size()) throw Error(ErrorCode::MalformedRow, "bad bin count", row);
            counts.push_back(v);
            start = end + 1;
        }
        try {
            out[ts] = sky_stats_from_histogram(counts, alpha);
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedRow, e.what(), row);
        }
    }
    return out;
}

SolarSeries attach_sky_stats(const SolarSeries& series, const std::map<Timestamp, SkyStats>& stats) {
    auto records = series.records();
    for (auto& r : records) {
        if (auto it = stats.find(r.timestamp); it != stats.end()) {
            r.mu = std::clamp(it->second.mu, 0.0, 1.0);
            r.sigma = it->second.sigma;
            r.entropy = it->second.entropy;
        }
    }
    return SolarSeries(series.site(), std::move(records));
}

std::size_t feature_count(FeatureSet set) { return set == FeatureSet::Full ? 6 : 3; }

std::vector<const char*> feature_names(FeatureSet set) {
    if (set == FeatureSet::Full) return {"ghi", "ghi_clr", "csi", "mu", "sigma", "entropy"};
    return {"ghi", "ghi_clr", "csi"};
}

// ---------------------------------------------------------------------------

void Standardizer::apply(std::span<double> x) const {
    if (x.size() != mean.size()) throw Error(ErrorCode::DimensionMismatch, "standardizer width");
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - mean[j]) / scale[j];
}

void Standardizer::invert(std::span<double> x) const {
    if (x.size() != mean.size()) throw Error(ErrorCode::DimensionMismatch, "standardizer width");
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = x[j] * scale[j] + mean[j];
}

Matrix Standardizer::apply(const Matrix& m) const {
    Matrix out = m;
    for (std::size_t r = 0; r < out.rows(); ++r) apply(out.row(r));
    out.mark_standardized();
    return out;
}

Matrix FeatureDataset::design_matrix() const {
    Matrix m(rows.size(), dims());
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].x.begin(), rows[i].x.end(), m.row(i).begin());
    m.mark_standardized(standardized);
    return m;
}

std::vector<double> FeatureDataset::targets() const {
    std::vector<double> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) y[i] = rows[i].y;
    return y;
}

std::vector<double> feature_vector(const SolarRecord& r, const solar::SiteConfig& site, FeatureSet set) {
    const double clr = r.ghi_clr ? *r.ghi_clr : solar::clear_sky(r.timestamp, site).ghi_clr;
    std::vector<double> x{r.ghi, clr, solar::clear_sky_index(r.ghi, clr)};
    if (set == FeatureSet::Full) {
        if (!r.has_sky_stats()) throw Error(ErrorCode::InvalidConfig, "record lacks sky statistics");
        x.insert(x.end(), {*r.mu, *r.sigma, *r.entropy});
    }
    return x;
}

FeatureDataset build_supervised(const SolarSeries& series, FeatureSet set, int start_hour, int end_hour) {
    FeatureDataset ds;
    ds.feature_set = set;
    const auto& recs = series.records();
    for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
        const auto& now = recs[i];
        const auto& next = recs[i + 1];
        const int h = now.timestamp.hour();
        if (h < start_hour || h + 1 > end_hour) continue;
        if (next.timestamp != now.timestamp.plus_hours(1)) continue;
        ds.rows.push_back({feature_vector(now, series.site(), set), next.ghi, now.timestamp});
    }
    return ds;
}

FeatureDataset build_supervised_for_targets(const SolarSeries& context, const SolarSeries& targets, FeatureSet set,
                                            int start_hour, int end_hour) {
    FeatureDataset ds;
    ds.feature_set = set;
    for (const auto& target : targets.records()) {
        const int h = target.timestamp.hour();
        if (h - 1 < start_hour || h > end_hour) continue;
        const auto* issue = context.find(target.timestamp.plus_hours(-1));
        if (!issue) continue;
        ds.rows.push_back({feature_vector(*issue, context.site(), set), target.ghi, issue->timestamp});
    }
    return ds;
}

namespace {

Standardizer fit_columns(std::size_t n, std::size_t d, auto&& at) {
    if (n == 0) throw Error(ErrorCode::EmptyInput, "cannot fit a standardizer on no rows");
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += at(i, j);
        m /= static_cast<double>(n);
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = at(i, j) - m;
            v += e * e;
        }
        const double sd = std::sqrt(v / static_cast<double>(n));
        if (sd > 1e-12 * std::max(1.0, std::abs(m))) {
            s.mean[j] = m;
            s.scale[j] = sd;
        }
    }
    return s;
}

} // namespace

Standardizer fit_standardizer(const FeatureDataset& train) {
    return fit_columns(train.size(), train.dims(), [&](std::size_t i, std::size_t j) { return train.rows[i].x[j]; });
}

Standardizer fit_standardizer(const Matrix& m) {
    return fit_columns(m.rows(), m.cols(), [&](std::size_t i, std::size_t j) { return m(i, j); });
}

FeatureDataset apply_standardizer(const Standardizer& scaler, const FeatureDataset& dataset) {
    FeatureDataset out = dataset;
    for (auto& r : out.rows) scaler.apply(r.x);
    out.standardized = true;
    return out;
}

// ---------------------------------------------------------------------------
// Characterization

std::vector<double> autocorrelation(std::span<const double> values, std::size_t max_lag) {
    const std::size_t n = values.size();
    std::vector<double> acf(max_lag + 1, 0.0);
    if (n == 0) return acf;
    const double m = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double c0 = 0.0;
    for (double v : values) c0 += (v - m) * (v - m);
    if (c0 <= 0.0) return acf;
    for (std::size_t k = 0; k <= max_lag && k < n; ++k) {
        double c = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) c += (values[t] - m) * (values[t + k] - m);
        acf[k] = c / c0;
    }
    return acf;
}

namespace {

double variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double strength(const std::vector<double>& remainder, const std::vector<double>& component_plus_remainder,
                double scale_var) {
    const double denom = variance(component_plus_remainder);
    if (denom <= 1e-12 * scale_var) return 0.0;
    return std::clamp(1.0 - variance(remainder) / denom, 0.0, 1.0);
}

} // namespace

TsCharacteristics characterize(std::span<const double> values, int candidate_period) {
    if (candidate_period < 2) throw Error(ErrorCode::InvalidConfig, "candidate_period must be >= 2");
    const std::size_t n = values.size();
    if (n < 3 * static_cast<std::size_t>(candidate_period))
        throw Error(ErrorCode::TooShort, "need at least 3 * candidate_period values");

    TsCharacteristics out;
    const std::size_t max_lag = n / 3;
    const auto acf = autocorrelation(values, max_lag + 1);
    double best = 0.3;
    for (std::size_t k = 2; k <= max_lag; ++k) {
        if (acf[k] > acf[k - 1] && acf[k] >= acf[k + 1] && acf[k] > best) {
            best = acf[k];
            out.periodicity = static_cast<int>(k);
        }
    }

    const std::size_t w = out.periodicity > 0 ? static_cast<std::size_t>(out.periodicity)
                                              : static_cast<std::size_t>(candidate_period);
    const std::size_t half = w / 2;
    if (n <= 2 * half + w) {
        return out;
    }

    // Centered moving average (2xw for even windows).
    const std::size_t first = half, last = n - half;  // valid [first, last)
    std::vector<double> trend(n, 0.0);
    for (std::size_t i = first; i < last; ++i) {
        double s = 0.0;
        if (w % 2 == 1) {
            for (std::size_t j = i - half; j <= i + half; ++j) s += values[j];
            trend[i] = s / static_cast<double>(w);
        } else {
            for (std::size_t j = i - half + 1; j < i + half; ++j) s += values[j];
            s += 0.5 * (values[i - half] + values[i + half]);
            trend[i] = s / static_cast<double>(w);
        }
    }

    std::vector<double> phase_sum(w, 0.0), phase_n(w, 0.0);
    for (std::size_t i = first; i < last; ++i) {
        phase_sum[i % w] += values[i] - trend[i];
        phase_n[i % w] += 1.0;
    }
    std::vector<double> phase_mean(w, 0.0);
    double centre = 0.0;
    for (std::size_t p = 0; p < w; ++p) {
        phase_mean[p] = phase_n[p] > 0 ? phase_sum[p] / phase_n[p] : 0.0;
        centre += phase_mean[p];
    }
    centre /= static_cast<double>(w);

    std::vector<double> r, tr, sr;
    for (std::size_t i = first; i < last; ++i) {
        const double s = phase_mean[i % w] - centre;
        const double rem = values[i] - trend[i] - s;
        r.push_back(rem);
        tr.push_back(trend[i] + rem);
        sr.push_back(s + rem);
    }
    const double scale_var = std::max(variance(std::vector<double>(values.begin(), values.end())), 1e-300);
    out.trend = strength(r, tr, scale_var);
    out.seasonality = strength(r, sr, scale_var);
    return out;
}

} // namespace hsf::features
