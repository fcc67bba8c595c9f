#pragma once

#include <random>
#include <vector>

#include "gainml/dataset.hpp"
#include "gainml/kernel.hpp"
#include "gainml/synthgen.hpp"
#include "oracle.hpp"

namespace testutil {

inline std::vector<oracle::Point> random_points(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::normal_distribution<double> g;
    std::vector<oracle::Point> pts(n, oracle::Point(d));
    for (auto& p : pts)
        for (auto& v : p) v = g(rng);
    return pts;
}

inline std::vector<double> flatten(const std::vector<oracle::Point>& pts) {
    std::vector<double> out;
    for (const auto& p : pts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

inline gainml::DesignMatrix as_matrix(const std::vector<oracle::Point>& pts) {
    return gainml::DesignMatrix::from_standardized(flatten(pts), pts[0].size());
}

inline gainml::AlignedDataset aligned_farm(const gainml::SyntheticFarm& farm, const gainml::FarmScenario& s) {
    return gainml::align(farm.ref, farm.ctrb, farm.ctrn, farm.boundary, s.cadence_seconds);
}

// Dataset with records whose fields come from a callback, P1 then P2.
template <typename F>
gainml::AlignedDataset make_dataset(std::size_t n_p1, std::size_t n_p2, F&& fill) {
    gainml::AlignedDataset data;
    const auto start = gainml::parse_timestamp("2021-01-01T00:00:00Z");
    for (std::size_t i = 0; i < n_p1 + n_p2; ++i) {
        gainml::AlignedRecord r;
        r.timestamp = start + std::chrono::seconds(600 * static_cast<long>(i));
        r.period = i < n_p1 ? gainml::Period::P1 : gainml::Period::P2;
        fill(i, r);
        data.records.push_back(r);
    }
    data.boundary = start + std::chrono::seconds(600 * static_cast<long>(n_p1));
    return data;
}

}  // namespace testutil
