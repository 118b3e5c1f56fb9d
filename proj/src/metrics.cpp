#include "slac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "json.hpp"
#include "slac/cluster.hpp"
#include "slac/rng.hpp"

namespace slac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    return std::sqrt(squared_distance(a, b));
}

// contiguous cluster index -> member point indices
std::vector<std::vector<std::size_t>> group(const std::vector<int>& labels) {
    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_label[labels[i]].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [lbl, members] : by_label) out.push_back(std::move(members));
    return out;
}

std::vector<double> centroid(const std::vector<std::vector<double>>& points,
                             const std::vector<std::size_t>& members) {
    std::vector<double> c(points[0].size(), 0.0);
    for (std::size_t i : members)
        for (std::size_t j = 0; j < c.size(); ++j) c[j] += points[i][j];
    for (double& v : c) v /= static_cast<double>(members.size());
    return c;
}

void check_labels(const std::vector<std::vector<double>>& points,
                  const std::vector<int>& labels, const char* op) {
    if (points.size() != labels.size())
        throw MetricError(std::string(op) + ": points/labels length mismatch");
    if (points.empty()) throw MetricError(std::string(op) + ": empty input");
}

}  // namespace

double silhouette(const std::vector<std::vector<double>>& points,
                  const std::vector<int>& labels) {
    check_labels(points, labels, "silhouette");
    auto clusters = group(labels);
    if (clusters.size() < 2) throw MetricError("silhouette: needs >= 2 clusters");
    // cluster index per point, in grouped numbering
    std::vector<std::size_t> cidx(points.size());
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (std::size_t i : clusters[c]) cidx[i] = c;
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t own = cidx[i];
        if (clusters[own].size() == 1) continue;  // singleton contributes s = 0
        double a = 0.0;
        for (std::size_t j : clusters[own])
            if (j != i) a += distance(points[i], points[j]);
        a /= static_cast<double>(clusters[own].size() - 1);
        double b = kInf;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            if (c == own) continue;
            double m = 0.0;
            for (std::size_t j : clusters[c]) m += distance(points[i], points[j]);
            b = std::min(b, m / static_cast<double>(clusters[c].size()));
        }
        double mx = std::max(a, b);
        total += (mx > 0.0) ? (b - a) / mx : 0.0;
    }
    return total / static_cast<double>(points.size());
}

double calinski_harabasz(const std::vector<std::vector<double>>& points,
                         const std::vector<int>& labels) {
    check_labels(points, labels, "calinski_harabasz");
    auto clusters = group(labels);
    std::size_t K = clusters.size(), N = points.size();
    if (K < 2) throw MetricError("calinski_harabasz: needs >= 2 clusters");
    if (N <= K) throw MetricError("calinski_harabasz: needs N > K");
    std::vector<std::size_t> all(N);
    for (std::size_t i = 0; i < N; ++i) all[i] = i;
    auto global = centroid(points, all);
    double between = 0.0, within = 0.0;
    for (const auto& members : clusters) {
        auto c = centroid(points, members);
        between += static_cast<double>(members.size()) * squared_distance(c, global);
        for (std::size_t i : members) within += squared_distance(points[i], c);
    }
    double num = between / static_cast<double>(K - 1);
    double den = within / static_cast<double>(N - K);
    if (den == 0.0) return kInf;
    return num / den;
}

double dunn(const std::vector<std::vector<double>>& points,
            const std::vector<int>& labels) {
    check_labels(points, labels, "dunn");
    auto clusters = group(labels);
    if (clusters.size() < 2) throw MetricError("dunn: needs >= 2 clusters");
    double min_between = kInf;
    for (std::size_t a = 0; a < clusters.size(); ++a)
        for (std::size_t b = a + 1; b < clusters.size(); ++b)
            for (std::size_t i : clusters[a])
                for (std::size_t j : clusters[b])
                    min_between = std::min(min_between, distance(points[i], points[j]));
    double max_diameter = 0.0;
    for (const auto& members : clusters)
        for (std::size_t x = 0; x < members.size(); ++x)
            for (std::size_t y = x + 1; y < members.size(); ++y)
                max_diameter = std::max(
                    max_diameter, distance(points[members[x]], points[members[y]]));
    if (max_diameter == 0.0) return kInf;
    return min_between / max_diameter;
}

double davies_bouldin(const std::vector<std::vector<double>>& points,
                      const std::vector<int>& labels) {
    check_labels(points, labels, "davies_bouldin");
    auto clusters = group(labels);
    std::size_t K = clusters.size();
    if (K < 2) throw MetricError("davies_bouldin: needs >= 2 clusters");
    std::vector<std::vector<double>> cents;
    std::vector<double> dispersion;
    for (const auto& members : clusters) {
        auto c = centroid(points, members);
        double s = 0.0;
        for (std::size_t i : members) s += distance(points[i], c);
        dispersion.push_back(s / static_cast<double>(members.size()));
        cents.push_back(std::move(c));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            if (i == j) continue;
            double d = distance(cents[i], cents[j]);
            if (d == 0.0) return kInf;  // coincident centroids
            worst = std::max(worst, (dispersion[i] + dispersion[j]) / d);
        }
        total += worst;
    }
    return total / static_cast<double>(K);
}

ValidityReport validity_report(const std::vector<std::vector<double>>& points,
                               const std::vector<int>& labels) {
    ValidityReport r;
    r.n = points.size();
    r.k = group(labels).size();
    r.silhouette = silhouette(points, labels);
    r.calinski_harabasz = calinski_harabasz(points, labels);
    r.dunn = dunn(points, labels);
    r.davies_bouldin = davies_bouldin(points, labels);
    return r;
}

std::string ValidityReport::to_json() const {
    nlohmann::json j;
    auto put = [&](const char* name, double v) {
        if (std::isinf(v))
            j[name] = "inf";
        else
            j[name] = v;
    };
    put("silhouette", silhouette);
    put("calinski_harabasz", calinski_harabasz);
    put("dunn", dunn);
    put("davies_bouldin", davies_bouldin);
    j["k"] = k;
    j["n"] = n;
    return j.dump(2);
}

double nmi(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw MetricError("nmi: labelings differ in length");
    if (labels_a.empty()) throw MetricError("nmi: empty labelings");
    double n = static_cast<double>(labels_a.size());
    std::map<int, double> ca, cb;
    std::map<std::pair<int, int>, double> joint;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        ca[labels_a[i]] += 1.0;
        cb[labels_b[i]] += 1.0;
        joint[{labels_a[i], labels_b[i]}] += 1.0;
    }
    double ha = 0.0, hb = 0.0, mi = 0.0;
    for (const auto& [lbl, c] : ca) {
        double p = c / n;
        ha -= p * std::log(p);
    }
    for (const auto& [lbl, c] : cb) {
        double p = c / n;
        hb -= p * std::log(p);
    }
    for (const auto& [pair, c] : joint) {
        double pij = c / n;
        double pi = ca[pair.first] / n;
        double pj = cb[pair.second] / n;
        mi += pij * std::log(pij / (pi * pj));
    }
    if (ha == 0.0 || hb == 0.0)
        return (ca.size() == 1 && cb.size() == 1) ? 1.0 : 0.0;
    return mi / std::sqrt(ha * hb);
}

namespace {

// Jacobi eigenvalue iteration for a small symmetric matrix
void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& eigvals,
                  std::vector<std::vector<double>>& eigvecs) {
    std::size_t n = a.size();
    eigvecs.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) eigvecs[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    double aip = a[i][p], aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double api = a[p][i], aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double vip = eigvecs[i][p], viq = eigvecs[i][q];
                    eigvecs[i][p] = c * vip - s * viq;
                    eigvecs[i][q] = s * vip + c * viq;
                }
            }
    }
    eigvals.resize(n);
    for (std::size_t i = 0; i < n; ++i) eigvals[i] = a[i][i];
}

}  // namespace

PcaProjection pca_project(const std::vector<std::vector<double>>& points) {
    if (points.size() < 2) throw MetricError("pca_project: needs >= 2 points");
    std::size_t n = points.size(), dim = points[0].size();
    std::vector<double> mean(dim, 0.0);
    for (const auto& p : points)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += p[j];
    for (double& v : mean) v /= static_cast<double>(n);
    std::vector<std::vector<double>> cov(dim, std::vector<double>(dim, 0.0));
    for (const auto& p : points)
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i; j < dim; ++j)
                cov[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i; j < dim; ++j) {
            cov[i][j] /= static_cast<double>(n);
            cov[j][i] = cov[i][j];
        }
    std::vector<double> eigvals;
    std::vector<std::vector<double>> eigvecs;
    jacobi_eigen(cov, eigvals, eigvecs);
    double trace = 0.0;
    for (double v : eigvals) trace += std::max(v, 0.0);
    std::vector<std::size_t> order(dim);
    for (std::size_t i = 0; i < dim; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return eigvals[a] > eigvals[b]; });
    PcaProjection out;
    out.coords.resize(n);
    for (std::size_t c = 0; c < 2; ++c) {
        std::size_t e = (c < dim) ? order[c] : order.back();
        double lambda = (c < dim) ? std::max(eigvals[e], 0.0) : 0.0;
        out.explained_variance_ratio[c] = trace > 0.0 ? lambda / trace : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double proj = 0.0;
            if (c < dim)
                for (std::size_t j = 0; j < dim; ++j)
                    proj += (points[i][j] - mean[j]) * eigvecs[j][e];
            out.coords[i][c] = proj;
        }
    }
    return out;
}

std::vector<ValidityReport> sweep_k(const std::vector<std::vector<double>>& points,
                                    const std::vector<std::size_t>& k_set,
                                    std::uint64_t seed) {
    std::vector<ValidityReport> out;
    for (std::size_t k : k_set) {
        if (k < 2 || k >= points.size())
            throw MetricError("sweep_k: k must be in [2, N)");
        KMeansResult res = kmeans(points, k, splitmix64(seed ^ k));
        out.push_back(validity_report(points, res.assignment));
    }
    return out;
}

}  // namespace slac
