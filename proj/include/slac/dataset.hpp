#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "slac/tensor.hpp"

namespace slac {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// one measurement: (time, variable, value)
struct ObservationTriplet {
    double t = 0.0;       // hours since admission (scaled to [0,1] after normalize)
    std::size_t f = 0;    // index into the time-series vocabulary
    double v = 0.0;
};

struct TimeSeriesSample {
    std::string id;
    std::vector<double> statics;  // NaN marks a missing entry before imputation
    std::vector<ObservationTriplet> triplets;
    std::optional<int> truth_label;  // synthetic data only; never seen by training
};

struct VarStats {
    double mean = 0.0;
    double stddev = 1.0;
};

struct Vocabulary {
    std::vector<std::string> ts_vars;
    std::vector<std::string> static_vars;
    std::vector<VarStats> ts_stats;
    std::vector<VarStats> static_stats;
    bool has_stats = false;
    double horizon = 120.0;

    std::size_t num_ts() const { return ts_vars.size(); }
    std::size_t num_static() const { return static_vars.size(); }
    std::optional<std::size_t> ts_index(const std::string& name) const;
    std::optional<std::size_t> static_index(const std::string& name) const;

    std::string to_json() const;
    static Vocabulary from_json(const std::string& text);
};

struct ForecastInstance {
    std::string sample_id;
    double window_hours = 0.0;
    std::vector<double> statics;
    std::vector<ObservationTriplet> observed;  // t <= w, normalized units
    std::vector<double> mask;    // length |F|, 1 iff variable observed in (w, w+2]
    std::vector<double> target;  // length |F|, earliest value in the window, 0 where masked out
};

struct SplitSpec {
    std::uint64_t seed = 0;
    std::vector<std::string> train;
    std::vector<std::string> val;

    std::string to_json() const;
    static SplitSpec from_json(const std::string& text);
};

std::vector<TimeSeriesSample> ingest_csv(const std::string& triplet_path,
                                         const std::string& static_path,
                                         const Vocabulary& vocab);

// population mean/std per variable over the training split; constant or
// unobserved variables fall back to std 1 (and mean 0 when unobserved)
void fit_normalization(const std::vector<TimeSeriesSample>& train_samples,
                       Vocabulary& vocab,
                       std::vector<std::string>* warnings = nullptr);

TimeSeriesSample normalize(const TimeSeriesSample& s, const Vocabulary& vocab);
TimeSeriesSample denormalize(const TimeSeriesSample& s, const Vocabulary& vocab);

// replaces NaN static entries by the training-split mean of that variable
void impute_static_mean(std::vector<TimeSeriesSample>& samples,
                        const std::vector<const TimeSeriesSample*>& train,
                        std::size_t num_static,
                        std::vector<std::string>* warnings = nullptr);

struct ForecastBuildResult {
    std::vector<ForecastInstance> instances;
    std::size_t excluded = 0;
};

ForecastBuildResult build_forecast_instances(
    const std::vector<TimeSeriesSample>& normalized_samples,
    const Vocabulary& vocab,
    const std::vector<double>& windows_hours = {24, 48, 72, 96, 118},
    double pred_len_hours = 2.0);

SplitSpec split(const std::vector<TimeSeriesSample>& samples, double train_ratio,
                std::uint64_t seed);

}  // namespace slac
