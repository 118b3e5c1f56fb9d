#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "slac/dataset.hpp"
#include "slac/graph.hpp"
#include "slac/rng.hpp"
#include "slac/tensor.hpp"

namespace slac {

struct HyperParams {
    std::size_t blocks = 2;   // transformer blocks
    std::size_t dim = 32;     // embedding width d
    std::size_t heads = 4;
    double dropout = 0.2;
    double lr = 5e-4;
    std::size_t num_ts = 0;      // |F|
    std::size_t num_static = 0;  // D
    std::size_t k = 3;           // cluster count

    std::size_t cve_hidden() const {
        return static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(dim))));
    }
    std::size_t rep_dim() const { return 2 * dim; }
    void validate() const;
};

// All learnable tensors. Weight matrices are stored input-rows x
// output-cols so a forward step is row_vector x W + b.
struct EncoderParams {
    struct Block {
        Tensor wq, bq, wk, bk, wv, bv, wo, bo;
        Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;  // hidden width 2d, tanh
        Tensor ln1_g, ln1_b, ln2_g, ln2_b;
    };

    HyperParams hp;
    Tensor feature_table;            // |F| x d
    Tensor value_w, value_b, value_u;  // 1 x sq, 1 x sq, sq x d
    Tensor time_w, time_b, time_u;
    std::vector<Block> blocks;
    Tensor fuse_w1, fuse_b1, fuse_w2, fuse_b2;      // d -> sq -> 1 scoring FFN
    Tensor static_w1, static_b1, static_w2, static_b2;  // D -> d -> d
    bool has_forecast_head = false;
    Tensor forecast_w, forecast_b;   // 2d x |F|, 1 x |F|
    bool has_classifier_head = false;
    Tensor classifier_w, classifier_b;  // 2d x k, 1 x k

    static EncoderParams init(const HyperParams& hp, Rng& rng);
    void attach_forecast_head(Rng& rng);
    void strip_forecast_head();
    void attach_classifier_head(Rng& rng);

    // visits every live tensor in a stable order with a stable name
    void visit(const std::function<void(const std::string&, Tensor&)>& fn);
    void visit(const std::function<void(const std::string&, const Tensor&)>& fn) const;
    std::vector<Tensor*> tensors();
};

// parameter leaves of one graph, mirroring EncoderParams
struct BoundParams {
    Graph::Id feature_table, value_w, value_b, value_u, time_w, time_b, time_u;
    struct Block {
        Graph::Id wq, bq, wk, bk, wv, bv, wo, bo;
        Graph::Id ffn_w1, ffn_b1, ffn_w2, ffn_b2;
        Graph::Id ln1_g, ln1_b, ln2_g, ln2_b;
    };
    std::vector<Block> blocks;
    Graph::Id fuse_w1, fuse_b1, fuse_w2, fuse_b2;
    Graph::Id static_w1, static_b1, static_w2, static_b2;
    Graph::Id forecast_w = -1, forecast_b = -1;
    Graph::Id classifier_w = -1, classifier_b = -1;
    std::vector<Graph::Id> ordered;  // same order as EncoderParams::visit
    const HyperParams* hp = nullptr;
};

BoundParams bind(Graph& g, EncoderParams& p);

// collect gradients in visit order after backward(); zero tensors for
// parameters the loss never touched
std::vector<Tensor> collect_grads(const Graph& g, const BoundParams& b,
                                  const EncoderParams& p);

// FFN(x) = U tanh(Wx + b) applied per scalar in the n x 1 column
Graph::Id cve_embed(Graph& g, Graph::Id x_col, Graph::Id w, Graph::Id b, Graph::Id u);

// per-triplet sum of feature lookup, value CVE, and time CVE -> n x d
Graph::Id triplet_embed(Graph& g, const BoundParams& bp,
                        const std::vector<ObservationTriplet>& triplets);

Graph::Id encode_contextual(Graph& g, const BoundParams& bp, Graph::Id embeddings,
                            Mode mode, Rng& dropout_rng);

// attention pooling: score per contextual embedding, softmax, weighted sum
Graph::Id fuse(Graph& g, const BoundParams& bp, Graph::Id contextual);

Graph::Id embed_static(Graph& g, const BoundParams& bp,
                       const std::vector<double>& statics);

// full path to the 1 x 2d representation [e^d ; e^T]
Graph::Id encode_sample(Graph& g, const BoundParams& bp, const TimeSeriesSample& s,
                        Mode mode, Rng& dropout_rng);

Graph::Id forecast_head(Graph& g, const BoundParams& bp, Graph::Id rep);
Graph::Id classifier_logits(Graph& g, const BoundParams& bp, Graph::Id rep);

// eval-mode representation without exposing graph plumbing
std::vector<double> represent(const TimeSeriesSample& s, EncoderParams& p);

}  // namespace slac
