#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hsf/ingest.hpp"
#include "hsf/matrix.hpp"

namespace hsf::test {

inline Timestamp at(int year, int month, int day, int hour) { return Timestamp::from_civil({year, month, day, hour, 0, 0}); }

inline SolarRecord record(Timestamp t, double ghi, double ghi_clr, double mu = 0.3, double sigma = 0.05,
                          double entropy = 2.0) {
    SolarRecord r;
    r.timestamp = t;
    r.ghi = ghi;
    r.ghi_clr = ghi_clr;
    r.mu = mu;
    r.sigma = sigma;
    r.entropy = entropy;
    return r;
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("hsf_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// N x d standard-normal design with the standardized flag set.
inline Matrix normal_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = g(rng);
    m.mark_standardized();
    return m;
}

} // namespace hsf::test
