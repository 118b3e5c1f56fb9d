#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "slac/tensor.hpp"

namespace slac {

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal validity indices for one clustering. Degenerate denominators
// yield +inf sentinels and are reported, never clipped.
struct ValidityReport {
    double silhouette = 0.0;
    double calinski_harabasz = 0.0;
    double dunn = 0.0;
    double davies_bouldin = 0.0;
    std::size_t k = 0;
    std::size_t n = 0;

    std::string to_json() const;
};

double silhouette(const std::vector<std::vector<double>>& points,
                  const std::vector<int>& labels);
double calinski_harabasz(const std::vector<std::vector<double>>& points,
                         const std::vector<int>& labels);
double dunn(const std::vector<std::vector<double>>& points,
            const std::vector<int>& labels);
double davies_bouldin(const std::vector<std::vector<double>>& points,
                      const std::vector<int>& labels);

ValidityReport validity_report(const std::vector<std::vector<double>>& points,
                               const std::vector<int>& labels);

// NMI(A;B) = I(A;B) / sqrt(H(A) H(B)), natural logs. A zero-entropy
// labeling gives 1 when both labelings are constant, else 0.
double nmi(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

struct PcaProjection {
    std::vector<std::array<double, 2>> coords;  // N x 2
    std::array<double, 2> explained_variance_ratio = {0.0, 0.0};
};

PcaProjection pca_project(const std::vector<std::vector<double>>& points);

// clustering stage per k over fixed points; deterministic per seed
std::vector<ValidityReport> sweep_k(const std::vector<std::vector<double>>& points,
                                    const std::vector<std::size_t>& k_set,
                                    std::uint64_t seed);

}  // namespace slac
