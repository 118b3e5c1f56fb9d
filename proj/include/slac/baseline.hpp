#pragma once

#include <cstdint>
#include <vector>

#include "slac/cluster.hpp"
#include "slac/dataset.hpp"
#include "slac/metrics.hpp"

namespace slac {

struct GridSpec {
    double step = 6.0;      // hours
    double horizon = 120.0;  // hours

    std::size_t length() const;
    void validate() const;
};

// per-variable linear interpolation onto the grid, constant extrapolation
// at the edges, unobserved variables filled with the normalized mean (0);
// returns |F| * grid_len values
std::vector<double> interpolate_to_grid(const TimeSeriesSample& normalized_sample,
                                        const Vocabulary& vocab, const GridSpec& grid);

// flattened vector = [interpolated grid values ; imputed static vector]
std::vector<double> flatten_sample(const TimeSeriesSample& normalized_sample,
                                   const Vocabulary& vocab, const GridSpec& grid);

struct BaselineResult {
    std::vector<std::vector<double>> flattened;  // N x (|F|*grid_len + D)
    KMeansResult clustering;
    ValidityReport report;
};

BaselineResult baseline_cluster(const std::vector<TimeSeriesSample>& normalized_samples,
                                const Vocabulary& vocab, std::size_t k,
                                const GridSpec& grid, std::uint64_t seed);

}  // namespace slac
