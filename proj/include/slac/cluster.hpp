#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slac/tensor.hpp"

namespace slac {

struct ClusterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KMeansResult {
    std::vector<std::vector<double>> centroids;  // k x dim
    std::vector<int> assignment;                 // one label per point
    double objective = 0.0;  // mean squared distance to assigned centroid
    bool degenerate = false; // all points identical
};

// k-means++ seeding, Lloyd iterations to an assignment fixpoint (or 300
// iterations), empty clusters reseeded from the point farthest from its
// centroid. `restarts` runs are done with deterministic sub-seeds and the
// best objective wins.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t restarts = 10,
                    std::size_t max_iter = 300);

std::size_t nearest_centroid(const std::vector<double>& point,
                             const std::vector<std::vector<double>>& centroids);

double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace slac
