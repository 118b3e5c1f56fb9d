#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slac/dataset.hpp"

namespace slac {

// Per-regime curve parameters: variable j of a sample from this regime
// follows baseline + amplitude*sin(frequency*t + phase) + drift*t plus
// Gaussian noise.
struct RegimeSpec {
    std::vector<double> amplitude;
    std::vector<double> frequency;  // angular, radians/hour
    std::vector<double> phase;
    std::vector<double> drift;      // per hour
    std::vector<double> baseline;
    std::vector<double> static_mean;
    std::vector<double> static_var;  // diagonal covariance, entries > 0
    double weight = 1.0;

    double curve(std::size_t var, double t_hours) const;
};

struct GeneratorConfig {
    std::size_t k_true = 3;
    std::size_t num_ts_vars = 5;
    std::size_t num_static_vars = 4;
    std::size_t num_samples = 300;
    double obs_rate = 0.25;   // Poisson events per hour per kept variable
    double noise_sigma = 0.5;
    double p_drop = 0.0;      // chance a variable is entirely unobserved
    double horizon = 120.0;
    std::uint64_t seed = 0;

    std::string to_json(const std::vector<RegimeSpec>& regimes) const;
    static std::pair<GeneratorConfig, std::vector<RegimeSpec>> from_json(
        const std::string& text);
};

void validate(const GeneratorConfig& cfg, const std::vector<RegimeSpec>& regimes);

std::vector<TimeSeriesSample> generate(const GeneratorConfig& cfg,
                                       const std::vector<RegimeSpec>& regimes);

// pairwise L2 distances between regime mean trajectories sampled hourly
std::vector<std::vector<double>> separation_report(
    const std::vector<RegimeSpec>& regimes, double horizon = 120.0);

// simple well-separated default regimes for demos and tests
std::vector<RegimeSpec> default_regimes(std::size_t k, std::size_t num_ts_vars,
                                        std::size_t num_static_vars);

Vocabulary synthetic_vocabulary(const GeneratorConfig& cfg);

void write_dataset_csv(const std::vector<TimeSeriesSample>& samples,
                       const Vocabulary& vocab, const std::string& triplet_path,
                       const std::string& static_path,
                       const std::string& truth_path);

}  // namespace slac
