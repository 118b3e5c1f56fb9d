#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "slac/adam.hpp"
#include "slac/cluster.hpp"
#include "slac/dataset.hpp"
#include "slac/encoder.hpp"

namespace slac {

struct TrainConfig {
    std::size_t batch = 8;
    std::size_t patience = 10;
    std::size_t max_proxy_epochs = 200;
    std::size_t iterations = 500;
    std::size_t epochs_per_iteration = 200;
    std::size_t k = 3;
    std::uint64_t seed = 0;

    void validate() const;
};

// L = (1/N') sum_k sum_j m_j^k (pred_j^k - target_j^k)^2; the divisor is
// the instance count, not the observed-entry count
double masked_mse(const std::vector<std::vector<double>>& pred,
                  const std::vector<std::vector<double>>& target,
                  const std::vector<std::vector<double>>& mask);

// mean over samples of -log softmax(logits)[label]
double classifier_loss(const std::vector<std::vector<double>>& logits,
                       const std::vector<int>& labels);

struct ProxyTrainState {
    EncoderParams params;        // live parameters (with forecast head)
    std::vector<Tensor> adam_m, adam_v;
    std::uint64_t adam_step = 0;
    std::size_t next_epoch = 0;
    double best_val = 0.0;
    std::size_t best_epoch = 0;
    EncoderParams best_params;
    std::vector<double> train_loss, val_loss;  // one entry per finished epoch
};

struct PretrainResult {
    EncoderParams params;  // best-validation parameters, forecast head attached
    std::vector<double> train_loss, val_loss;
    double initial_val_loss = 0.0;  // before the first update
    std::size_t best_epoch = 0;
    ProxyTrainState state;  // for resume / checkpointing
};

PretrainResult pretrain(const std::vector<ForecastInstance>& train_instances,
                        const std::vector<ForecastInstance>& val_instances,
                        const HyperParams& hp, const TrainConfig& cfg,
                        const ProxyTrainState* resume = nullptr);

// discards the forecast head; everything else is preserved bit-exactly
EncoderParams strip_head(const EncoderParams& pretrained);

struct ClusterState {
    std::vector<std::vector<double>> centroids;  // k x 2d
    std::vector<int> assignment;                 // per sample, sample order
    std::vector<double> nmi_trail;               // NMI(y_{t-1}, y_t), t >= 1
    std::vector<std::vector<std::size_t>> cluster_sizes;  // per iteration
};

struct ClusterTrainResult {
    EncoderParams params;
    ClusterState state;
    double classifier_agreement = 0.0;  // argmax vs final k-means partition
    std::vector<double> iteration_val_loss;  // best val loss per iteration
};

// called after each iteration with the assignment of that iteration
using IterationCallback =
    std::function<void(std::size_t iter, const std::vector<int>& assignment,
                       EncoderParams& params)>;

// SLAC alternation: k-means pseudo-labels on training-split
// representations (validation assigned to nearest centroid), fresh
// classifier head per iteration, joint encoder+classifier training with
// early stopping, NMI trail over all samples.
ClusterTrainResult cluster_train(const std::vector<TimeSeriesSample>& samples,
                                 const SplitSpec& split_spec,
                                 const EncoderParams& encoder,
                                 const TrainConfig& cfg,
                                 const IterationCallback& on_iteration = nullptr);

std::vector<std::vector<double>> extract_representations(
    const std::vector<TimeSeriesSample>& samples, EncoderParams& params);

}  // namespace slac
