// Deterministic synthetic dataset generators shared by the unit and
// acceptance suites.
#ifndef ICE_TESTS_SYNTH_HPP_
#define ICE_TESTS_SYNTH_HPP_

#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "ice/common.hpp"
#include "ice/data.hpp"

namespace synth {

// Box-Muller; std::normal_distribution is implementation-defined.
inline double gaussian(ice::Rng& g) {
    double u1 = ice::uniform_real(g);
    double u2 = ice::uniform_real(g);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Two separable Gaussian blobs, one per class. Homogeneous: a single linear
// model fits everywhere.
inline ice::Dataset two_blobs(std::size_t n_per_class, std::size_t dims, double separation,
                              std::uint64_t seed, double noise_rate = 0.0) {
    ice::Rng g(seed);
    ice::Dataset ds;
    ds.X = ice::Matrix(2 * n_per_class, dims);
    for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
        int y = i < n_per_class ? 0 : 1;
        double center = y == 0 ? -separation / 2.0 : separation / 2.0;
        for (std::size_t j = 0; j < dims; ++j)
            ds.X(i, j) = gaussian(g) + (j == 0 ? center : 0.0);
        if (noise_rate > 0.0 && ice::uniform_real(g) < noise_rate) y = 1 - y;
        ds.Y.push_back(y);
    }
    for (std::size_t j = 0; j < dims; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    return ds;
}

// Regime-flip data: instances live in well-separated regions of feature
// space and the class-conditional boundary flips sign between regions. A
// single linear model scores near chance; per-region models are easy.
inline ice::Dataset regime_flip(std::size_t n_per_region, std::size_t regions, std::uint64_t seed,
                                double margin = 1.0, double spread = 8.0) {
    ice::Rng g(seed);
    ice::Dataset ds;
    ds.X = ice::Matrix(n_per_region * regions, 2);
    for (std::size_t r = 0; r < regions; ++r) {
        double cx = spread * static_cast<double>(r);
        int sign = r % 2 == 0 ? 1 : -1;
        for (std::size_t i = 0; i < n_per_region; ++i) {
            std::size_t row = r * n_per_region + i;
            int y = i % 2;
            double offset = (y == 1 ? margin : -margin) * sign;
            ds.X(row, 0) = cx + gaussian(g) * 0.8;
            ds.X(row, 1) = offset + gaussian(g) * 0.6;
            ds.Y.push_back(y);
        }
    }
    ds.feature_names = {"f0", "f1"};
    return ds;
}

// Same region geometry as regime_flip but with one boundary orientation
// everywhere: spatially clustered yet homogeneous in the classification rule.
// Control condition for the subdomain experiment.
inline ice::Dataset regime_uniform(std::size_t n_per_region, std::size_t regions,
                                   std::uint64_t seed, double margin = 1.0, double spread = 8.0) {
    ice::Rng g(seed);
    ice::Dataset ds;
    ds.X = ice::Matrix(n_per_region * regions, 2);
    for (std::size_t r = 0; r < regions; ++r) {
        double cx = spread * static_cast<double>(r);
        for (std::size_t i = 0; i < n_per_region; ++i) {
            std::size_t row = r * n_per_region + i;
            int y = i % 2;
            double offset = y == 1 ? margin : -margin;
            ds.X(row, 0) = cx + gaussian(g) * 0.8;
            ds.X(row, 1) = offset + gaussian(g) * 0.6;
            ds.Y.push_back(y);
        }
    }
    ds.feature_names = {"f0", "f1"};
    return ds;
}

// XOR-style checkerboard of Gaussian cells.
inline ice::Dataset checkerboard(std::size_t n_per_cell, std::uint64_t seed, double spacing = 6.0) {
    ice::Rng g(seed);
    ice::Dataset ds;
    ds.X = ice::Matrix(4 * n_per_cell, 2);
    std::size_t row = 0;
    for (int cx = 0; cx < 2; ++cx)
        for (int cy = 0; cy < 2; ++cy) {
            int y = (cx + cy) % 2;
            for (std::size_t i = 0; i < n_per_cell; ++i, ++row) {
                ds.X(row, 0) = spacing * cx + gaussian(g);
                ds.X(row, 1) = spacing * cy + gaussian(g);
                ds.Y.push_back(y);
            }
        }
    ds.feature_names = {"f0", "f1"};
    return ds;
}

inline void write_csv(const ice::Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    for (std::size_t j = 0; j < ds.R(); ++j) out << ds.feature_names[j] << ",";
    out << "label\n";
    char buf[64];
    for (std::size_t i = 0; i < ds.Q(); ++i) {
        for (std::size_t j = 0; j < ds.R(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.10g", ds.X(i, j));
            out << buf << ",";
        }
        out << (ds.Y[i] != 0 ? "yes" : "no") << "\n";
    }
}

struct NamedDataset {
    std::string id;
    ice::Dataset data;
};

// Desk-scale benchmark corpus: a mix of clustered/regime datasets where
// individualized ensembles should help and homogeneous ones where they
// should roughly tie the baseline.
inline std::vector<NamedDataset> benchmark_suite() {
    std::vector<NamedDataset> out;
    out.push_back({"regime2_a", regime_flip(130, 2, 101)});
    out.push_back({"regime2_b", regime_flip(150, 2, 102, 1.2, 10.0)});
    out.push_back({"regime3_a", regime_flip(90, 3, 103)});
    out.push_back({"regime3_b", regime_flip(110, 3, 104, 0.9, 7.0)});
    out.push_back({"regime4_a", regime_flip(70, 4, 105)});
    out.push_back({"checker_a", checkerboard(70, 106)});
    out.push_back({"checker_b", checkerboard(85, 107, 7.0)});
    out.push_back({"checker_c", checkerboard(60, 108, 5.0)});
    out.push_back({"blobs_easy", two_blobs(140, 3, 4.0, 109)});
    out.push_back({"blobs_noisy", two_blobs(150, 4, 2.0, 110, 0.15)});
    out.push_back({"blobs_hard", two_blobs(130, 5, 1.0, 111, 0.05)});
    out.push_back({"blobs_wide", two_blobs(120, 8, 2.5, 112, 0.1)});
    return out;
}

}  // namespace synth

#endif
