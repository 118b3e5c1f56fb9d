#include "slac/encoder.hpp"

#include <algorithm>
#include <cmath>

namespace slac {

void HyperParams::validate() const {
    if (dim == 0 || heads == 0 || blocks == 0)
        throw EngineError("hyperparams: dim, heads, blocks must be positive");
    if (dim % heads != 0) throw EngineError("hyperparams: dim must be divisible by heads");
    if (dropout < 0.0 || dropout >= 1.0)
        throw EngineError("hyperparams: dropout must be in [0, 1)");
    if (num_ts == 0) throw EngineError("hyperparams: num_ts must be positive");
    if (k < 1) throw EngineError("hyperparams: k must be >= 1");
}

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, std::size_t r, std::size_t c,
              Rng& rng) {
    double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t = Tensor::zeros({r, c});
    for (double& v : t.data) v = rng.uniform(-a, a);
    return t;
}

Tensor zeros_row(std::size_t c) { return Tensor::zeros({std::size_t{1}, c}); }
Tensor ones_row(std::size_t c) {
    Tensor t = Tensor::zeros({std::size_t{1}, c});
    for (double& v : t.data) v = 1.0;
    return t;
}

}  // namespace

EncoderParams EncoderParams::init(const HyperParams& hp, Rng& rng) {
    hp.validate();
    std::size_t d = hp.dim, sq = hp.cve_hidden();
    EncoderParams p;
    p.hp = hp;
    p.feature_table = glorot(hp.num_ts, d, hp.num_ts, d, rng);
    p.value_w = glorot(1, sq, 1, sq, rng);
    p.value_b = zeros_row(sq);
    p.value_u = glorot(sq, d, sq, d, rng);
    p.time_w = glorot(1, sq, 1, sq, rng);
    p.time_b = zeros_row(sq);
    p.time_u = glorot(sq, d, sq, d, rng);
    for (std::size_t m = 0; m < hp.blocks; ++m) {
        Block b;
        b.wq = glorot(d, d, d, d, rng);
        b.bq = zeros_row(d);
        b.wk = glorot(d, d, d, d, rng);
        b.bk = zeros_row(d);
        b.wv = glorot(d, d, d, d, rng);
        b.bv = zeros_row(d);
        b.wo = glorot(d, d, d, d, rng);
        b.bo = zeros_row(d);
        b.ffn_w1 = glorot(d, 2 * d, d, 2 * d, rng);
        b.ffn_b1 = zeros_row(2 * d);
        b.ffn_w2 = glorot(2 * d, d, 2 * d, d, rng);
        b.ffn_b2 = zeros_row(d);
        b.ln1_g = ones_row(d);
        b.ln1_b = zeros_row(d);
        b.ln2_g = ones_row(d);
        b.ln2_b = zeros_row(d);
        p.blocks.push_back(std::move(b));
    }
    p.fuse_w1 = glorot(d, sq, d, sq, rng);
    p.fuse_b1 = zeros_row(sq);
    p.fuse_w2 = glorot(sq, 1, sq, 1, rng);
    p.fuse_b2 = zeros_row(1);
    std::size_t D = std::max<std::size_t>(hp.num_static, 1);
    p.static_w1 = glorot(D, d, D, d, rng);
    p.static_b1 = zeros_row(d);
    p.static_w2 = glorot(d, d, d, d, rng);
    p.static_b2 = zeros_row(d);
    return p;
}

void EncoderParams::attach_forecast_head(Rng& rng) {
    std::size_t rd = hp.rep_dim();
    forecast_w = glorot(rd, hp.num_ts, rd, hp.num_ts, rng);
    forecast_b = zeros_row(hp.num_ts);
    has_forecast_head = true;
}

void EncoderParams::strip_forecast_head() {
    forecast_w = Tensor();
    forecast_b = Tensor();
    has_forecast_head = false;
}

void EncoderParams::attach_classifier_head(Rng& rng) {
    std::size_t rd = hp.rep_dim();
    classifier_w = glorot(rd, hp.k, rd, hp.k, rng);
    classifier_b = zeros_row(hp.k);
    has_classifier_head = true;
}

void EncoderParams::visit(const std::function<void(const std::string&, Tensor&)>& fn) {
    fn("feature_table", feature_table);
    fn("value_cve.w", value_w);
    fn("value_cve.b", value_b);
    fn("value_cve.u", value_u);
    fn("time_cve.w", time_w);
    fn("time_cve.b", time_b);
    fn("time_cve.u", time_u);
    for (std::size_t m = 0; m < blocks.size(); ++m) {
        std::string pre = "block" + std::to_string(m) + ".";
        Block& b = blocks[m];
        fn(pre + "wq", b.wq);
        fn(pre + "bq", b.bq);
        fn(pre + "wk", b.wk);
        fn(pre + "bk", b.bk);
        fn(pre + "wv", b.wv);
        fn(pre + "bv", b.bv);
        fn(pre + "wo", b.wo);
        fn(pre + "bo", b.bo);
        fn(pre + "ffn_w1", b.ffn_w1);
        fn(pre + "ffn_b1", b.ffn_b1);
        fn(pre + "ffn_w2", b.ffn_w2);
        fn(pre + "ffn_b2", b.ffn_b2);
        fn(pre + "ln1_g", b.ln1_g);
        fn(pre + "ln1_b", b.ln1_b);
        fn(pre + "ln2_g", b.ln2_g);
        fn(pre + "ln2_b", b.ln2_b);
    }
    fn("fuse.w1", fuse_w1);
    fn("fuse.b1", fuse_b1);
    fn("fuse.w2", fuse_w2);
    fn("fuse.b2", fuse_b2);
    fn("static.w1", static_w1);
    fn("static.b1", static_b1);
    fn("static.w2", static_w2);
    fn("static.b2", static_b2);
    if (has_forecast_head) {
        fn("forecast.w", forecast_w);
        fn("forecast.b", forecast_b);
    }
    if (has_classifier_head) {
        fn("classifier.w", classifier_w);
        fn("classifier.b", classifier_b);
    }
}

void EncoderParams::visit(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
    const_cast<EncoderParams*>(this)->visit(
        [&](const std::string& name, Tensor& t) { fn(name, t); });
}

std::vector<Tensor*> EncoderParams::tensors() {
    std::vector<Tensor*> out;
    visit([&](const std::string&, Tensor& t) { out.push_back(&t); });
    return out;
}

BoundParams bind(Graph& g, EncoderParams& p) {
    BoundParams bp;
    bp.hp = &p.hp;
    std::vector<Graph::Id> ordered;
    std::vector<Graph::Id*> slots;
    bp.blocks.resize(p.blocks.size());
    // rebuild the same order as visit() so ordered ids line up with grads
    std::size_t block_index = 0, field_index = 0;
    p.visit([&](const std::string& name, Tensor& t) {
        Graph::Id id = g.leaf(t, true);
        ordered.push_back(id);
        if (name == "feature_table") bp.feature_table = id;
        else if (name == "value_cve.w") bp.value_w = id;
        else if (name == "value_cve.b") bp.value_b = id;
        else if (name == "value_cve.u") bp.value_u = id;
        else if (name == "time_cve.w") bp.time_w = id;
        else if (name == "time_cve.b") bp.time_b = id;
        else if (name == "time_cve.u") bp.time_u = id;
        else if (name.rfind("block", 0) == 0) {
            BoundParams::Block& b = bp.blocks[block_index];
            Graph::Id* fields[] = {&b.wq, &b.bq, &b.wk, &b.bk, &b.wv, &b.bv,
                                   &b.wo, &b.bo, &b.ffn_w1, &b.ffn_b1, &b.ffn_w2,
                                   &b.ffn_b2, &b.ln1_g, &b.ln1_b, &b.ln2_g, &b.ln2_b};
            *fields[field_index] = id;
            if (++field_index == 16) {
                field_index = 0;
                ++block_index;
            }
        } else if (name == "fuse.w1") bp.fuse_w1 = id;
        else if (name == "fuse.b1") bp.fuse_b1 = id;
        else if (name == "fuse.w2") bp.fuse_w2 = id;
        else if (name == "fuse.b2") bp.fuse_b2 = id;
        else if (name == "static.w1") bp.static_w1 = id;
        else if (name == "static.b1") bp.static_b1 = id;
        else if (name == "static.w2") bp.static_w2 = id;
        else if (name == "static.b2") bp.static_b2 = id;
        else if (name == "forecast.w") bp.forecast_w = id;
        else if (name == "forecast.b") bp.forecast_b = id;
        else if (name == "classifier.w") bp.classifier_w = id;
        else if (name == "classifier.b") bp.classifier_b = id;
    });
    bp.ordered = std::move(ordered);
    return bp;
}

std::vector<Tensor> collect_grads(const Graph& g, const BoundParams& b,
                                  const EncoderParams& p) {
    std::vector<Tensor> out;
    std::size_t i = 0;
    p.visit([&](const std::string&, const Tensor& t) {
        const Tensor& grad = g.grad(b.ordered[i++]);
        out.push_back(grad.data.empty() ? Tensor::zeros(t.shape) : grad);
    });
    return out;
}

Graph::Id cve_embed(Graph& g, Graph::Id x_col, Graph::Id w, Graph::Id b, Graph::Id u) {
    Graph::Id h = g.tanh_(g.add_row(g.matmul(x_col, w), b));
    return g.matmul(h, u);
}

Graph::Id triplet_embed(Graph& g, const BoundParams& bp,
                        const std::vector<ObservationTriplet>& triplets) {
    if (triplets.empty()) throw EngineError("triplet_embed: empty triplet set");
    std::size_t n = triplets.size();
    std::vector<std::size_t> features(n);
    Tensor values = Tensor::zeros({n, std::size_t{1}});
    Tensor times = Tensor::zeros({n, std::size_t{1}});
    for (std::size_t i = 0; i < n; ++i) {
        if (triplets[i].f >= bp.hp->num_ts)
            throw EngineError("triplet_embed: feature index out of range");
        features[i] = triplets[i].f;
        values.data[i] = triplets[i].v;
        times.data[i] = triplets[i].t;
    }
    Graph::Id ef = g.gather_rows(bp.feature_table, std::move(features));
    Graph::Id ev = cve_embed(g, g.leaf(std::move(values)), bp.value_w, bp.value_b, bp.value_u);
    Graph::Id et = cve_embed(g, g.leaf(std::move(times)), bp.time_w, bp.time_b, bp.time_u);
    return g.add(g.add(ef, ev), et);
}

Graph::Id encode_contextual(Graph& g, const BoundParams& bp, Graph::Id embeddings,
                            Mode mode, Rng& dropout_rng) {
    std::size_t d = bp.hp->dim, h = bp.hp->heads, dh = d / h;
    double p = bp.hp->dropout;
    double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    Graph::Id x = embeddings;
    for (const auto& blk : bp.blocks) {
        Graph::Id q = g.add_row(g.matmul(x, blk.wq), blk.bq);
        Graph::Id k = g.add_row(g.matmul(x, blk.wk), blk.bk);
        Graph::Id v = g.add_row(g.matmul(x, blk.wv), blk.bv);
        std::vector<Graph::Id> heads;
        for (std::size_t i = 0; i < h; ++i) {
            Graph::Id qi = g.slice_cols(q, i * dh, dh);
            Graph::Id ki = g.slice_cols(k, i * dh, dh);
            Graph::Id vi = g.slice_cols(v, i * dh, dh);
            Graph::Id scores = g.scale(g.matmul_nt(qi, ki), inv_sqrt_dh);
            Graph::Id attn = g.softmax_rows(scores);
            attn = g.dropout(attn, p, mode, dropout_rng);
            heads.push_back(g.matmul(attn, vi));
        }
        Graph::Id mha = g.add_row(g.matmul(g.concat_cols(heads), blk.wo), blk.bo);
        Graph::Id y = g.layer_norm(g.add(x, mha), blk.ln1_g, blk.ln1_b);
        Graph::Id f = g.tanh_(g.add_row(g.matmul(y, blk.ffn_w1), blk.ffn_b1));
        f = g.add_row(g.matmul(f, blk.ffn_w2), blk.ffn_b2);
        f = g.dropout(f, p, mode, dropout_rng);
        x = g.layer_norm(g.add(y, f), blk.ln2_g, blk.ln2_b);
    }
    return x;
}

Graph::Id fuse(Graph& g, const BoundParams& bp, Graph::Id contextual) {
    Graph::Id hidden = g.tanh_(g.add_row(g.matmul(contextual, bp.fuse_w1), bp.fuse_b1));
    Graph::Id scores = g.add_row(g.matmul(hidden, bp.fuse_w2), bp.fuse_b2);  // n x 1
    Graph::Id alpha = g.softmax_rows(g.transpose(scores));                   // 1 x n
    return g.matmul(alpha, contextual);                                      // 1 x d
}

Graph::Id embed_static(Graph& g, const BoundParams& bp,
                       const std::vector<double>& statics) {
    for (double v : statics)
        if (std::isnan(v)) throw EngineError("embed_static: missing value present");
    std::vector<double> padded = statics;
    if (padded.empty()) padded.push_back(0.0);  // D = 0 degenerates to a constant input
    Graph::Id s = g.leaf(Tensor::row(std::move(padded)));
    Graph::Id hidden = g.tanh_(g.add_row(g.matmul(s, bp.static_w1), bp.static_b1));
    return g.add_row(g.matmul(hidden, bp.static_w2), bp.static_b2);
}

Graph::Id encode_sample(Graph& g, const BoundParams& bp, const TimeSeriesSample& s,
                        Mode mode, Rng& dropout_rng) {
    Graph::Id e = triplet_embed(g, bp, s.triplets);
    Graph::Id c = encode_contextual(g, bp, e, mode, dropout_rng);
    Graph::Id et = fuse(g, bp, c);
    Graph::Id ed = embed_static(g, bp, s.statics);
    return g.concat_cols({ed, et});
}

Graph::Id forecast_head(Graph& g, const BoundParams& bp, Graph::Id rep) {
    if (bp.forecast_w < 0) throw EngineError("forecast head not attached");
    return g.add_row(g.matmul(rep, bp.forecast_w), bp.forecast_b);
}

Graph::Id classifier_logits(Graph& g, const BoundParams& bp, Graph::Id rep) {
    if (bp.classifier_w < 0) throw EngineError("classifier head not attached");
    return g.add_row(g.matmul(rep, bp.classifier_w), bp.classifier_b);
}

std::vector<double> represent(const TimeSeriesSample& s, EncoderParams& p) {
    Graph g;
    BoundParams bp = bind(g, p);
    Rng unused(0);
    Graph::Id rep = encode_sample(g, bp, s, Mode::Eval, unused);
    return g.value(rep).data;
}

}  // namespace slac
