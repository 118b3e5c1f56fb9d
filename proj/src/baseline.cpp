#include "slac/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "slac/rng.hpp"

namespace slac {

std::size_t GridSpec::length() const {
    return static_cast<std::size_t>(std::llround(horizon / step)) + 1;
}

void GridSpec::validate() const {
    if (step <= 0.0 || horizon <= 0.0) throw DataError("grid: step and horizon must be > 0");
    double q = horizon / step;
    if (std::abs(q - std::round(q)) > 1e-9)
        throw DataError("grid: step must divide horizon");
}

std::vector<double> interpolate_to_grid(const TimeSeriesSample& s,
                                        const Vocabulary& vocab, const GridSpec& grid) {
    grid.validate();
    std::size_t F = vocab.num_ts(), glen = grid.length();
    // per-variable observations sorted by time; sample times are in
    // normalized units, the grid is in hours
    std::vector<std::vector<std::pair<double, double>>> obs(F);
    for (const auto& tr : s.triplets)
        obs[tr.f].push_back({tr.t * vocab.horizon, tr.v});
    for (auto& o : obs) std::sort(o.begin(), o.end());

    std::vector<double> out(F * glen, 0.0);
    for (std::size_t f = 0; f < F; ++f) {
        const auto& o = obs[f];
        if (o.empty()) continue;  // training-population mean is 0 in normalized units
        for (std::size_t gi = 0; gi < glen; ++gi) {
            double t = static_cast<double>(gi) * grid.step;
            double v;
            if (t <= o.front().first) {
                v = o.front().second;
            } else if (t >= o.back().first) {
                v = o.back().second;
            } else {
                std::size_t hi = 1;
                while (o[hi].first < t) ++hi;
                const auto& [t0, v0] = o[hi - 1];
                const auto& [t1, v1] = o[hi];
                v = (t1 == t0) ? v0 : v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            }
            out[f * glen + gi] = v;
        }
    }
    return out;
}

std::vector<double> flatten_sample(const TimeSeriesSample& s, const Vocabulary& vocab,
                                   const GridSpec& grid) {
    std::vector<double> out = interpolate_to_grid(s, vocab, grid);
    for (double v : s.statics) {
        if (std::isnan(v)) throw DataError("flatten_sample: static vector not imputed");
        out.push_back(v);
    }
    return out;
}

BaselineResult baseline_cluster(const std::vector<TimeSeriesSample>& samples,
                                const Vocabulary& vocab, std::size_t k,
                                const GridSpec& grid, std::uint64_t seed) {
    if (samples.size() < k) throw DataError("baseline_cluster: fewer samples than clusters");
    BaselineResult res;
    res.flattened.reserve(samples.size());
    for (const auto& s : samples) res.flattened.push_back(flatten_sample(s, vocab, grid));
    res.clustering = kmeans(res.flattened, k, splitmix64(seed ^ hash_label("baseline")));
    res.report = validity_report(res.flattened, res.clustering.assignment);
    return res;
}

}  // namespace slac
