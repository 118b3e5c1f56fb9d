#include "slac/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slac/rng.hpp"

namespace slac {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::size_t nearest_centroid(const std::vector<double>& point,
                             const std::vector<std::vector<double>>& centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        double d = squared_distance(point, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

namespace {

std::vector<std::vector<double>> kmeanspp_init(
    const std::vector<std::vector<double>>& points, std::size_t k, Rng& rng) {
    std::size_t n = points.size();
    std::vector<std::vector<double>> centroids;
    centroids.push_back(points[rng.uniform_int(n)]);
    std::vector<double> d2(n);
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids)
                best = std::min(best, squared_distance(points[i], c));
            d2[i] = best;
            total += best;
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.uniform_int(n);  // all remaining mass at existing centroids
        } else {
            double u = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(points[pick]);
    }
    return centroids;
}

KMeansResult lloyd(const std::vector<std::vector<double>>& points, std::size_t k,
                   Rng& rng, std::size_t max_iter) {
    std::size_t n = points.size(), dim = points[0].size();
    KMeansResult res;
    res.centroids = kmeanspp_init(points, k, rng);
    res.assignment.assign(n, -1);
    for (std::size_t it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int a = static_cast<int>(nearest_centroid(points[i], res.centroids));
            if (a != res.assignment[i]) {
                res.assignment[i] = a;
                changed = true;
            }
        }
        if (!changed && it > 0) break;
        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < dim; ++j)
                sums[res.assignment[i]][j] += points[i][j];
            ++counts[res.assignment[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // reseed from the point farthest from its centroid
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double d = squared_distance(
                        points[i], res.centroids[res.assignment[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                res.centroids[c] = points[far];
                res.assignment[far] = static_cast<int>(c);
            } else {
                for (std::size_t j = 0; j < dim; ++j)
                    res.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
            }
        }
        if (!changed) break;
    }
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        obj += squared_distance(points[i], res.centroids[res.assignment[i]]);
    res.objective = obj / static_cast<double>(n);
    return res;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t restarts, std::size_t max_iter) {
    if (k == 0) throw ClusterError("kmeans: k must be >= 1");
    if (points.size() < k)
        throw ClusterError("kmeans: fewer points (" + std::to_string(points.size()) +
                           ") than clusters (" + std::to_string(k) + ")");
    bool all_identical = true;
    for (std::size_t i = 1; i < points.size() && all_identical; ++i)
        all_identical = points[i] == points[0];

    KMeansResult best;
    bool have = false;
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng = Rng::substream(seed, "kmeans", r);
        KMeansResult res = lloyd(points, k, rng, max_iter);
        if (!have || res.objective < best.objective) {
            best = std::move(res);
            have = true;
        }
    }
    best.degenerate = all_identical && k > 1;
    return best;
}

}  // namespace slac
