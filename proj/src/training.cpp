#include "slac/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "slac/metrics.hpp"

namespace slac {

void TrainConfig::validate() const {
    if (batch < 1) throw EngineError("train config: batch must be >= 1");
    if (patience < 1) throw EngineError("train config: patience must be >= 1");
    if (k < 1) throw EngineError("train config: k must be >= 1");
}

double masked_mse(const std::vector<std::vector<double>>& pred,
                  const std::vector<std::vector<double>>& target,
                  const std::vector<std::vector<double>>& mask) {
    if (pred.size() != target.size() || pred.size() != mask.size())
        throw EngineError("masked_mse: batch size mismatch");
    if (pred.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].size() != target[i].size() || pred[i].size() != mask[i].size())
            throw EngineError("masked_mse: row length mismatch");
        for (std::size_t j = 0; j < pred[i].size(); ++j) {
            double d = pred[i][j] - target[i][j];
            total += mask[i][j] * d * d;
        }
    }
    return total / static_cast<double>(pred.size());
}

double classifier_loss(const std::vector<std::vector<double>>& logits,
                       const std::vector<int>& labels) {
    if (logits.size() != labels.size())
        throw EngineError("classifier_loss: batch size mismatch");
    if (logits.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const auto& l = logits[i];
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= l.size())
            throw EngineError("classifier_loss: label out of range");
        double mx = *std::max_element(l.begin(), l.end());
        double z = 0.0;
        for (double v : l) z += std::exp(v - mx);
        total += std::log(z) - (l[labels[i]] - mx);
    }
    return total / static_cast<double>(logits.size());
}

namespace {

TimeSeriesSample instance_as_sample(const ForecastInstance& inst) {
    TimeSeriesSample s;
    s.id = inst.sample_id;
    s.statics = inst.statics;
    s.triplets = inst.observed;
    return s;
}

// graph-side masked squared error for one instance (sum, not mean)
Graph::Id instance_loss(Graph& g, const BoundParams& bp, const ForecastInstance& inst,
                        Mode mode, Rng& drng) {
    TimeSeriesSample s = instance_as_sample(inst);
    Graph::Id rep = encode_sample(g, bp, s, mode, drng);
    Graph::Id pred = forecast_head(g, bp, rep);
    Graph::Id diff = g.sub(pred, g.leaf(Tensor::row(inst.target)));
    Graph::Id masked = g.mul(diff, g.leaf(Tensor::row(inst.mask)));
    return g.sum(g.mul(masked, diff));
}

double eval_forecast_loss(EncoderParams& p, const std::vector<ForecastInstance>& insts) {
    if (insts.empty()) return 0.0;
    double total = 0.0;
    Rng unused(0);
    for (const auto& inst : insts) {
        Graph g;
        BoundParams bp = bind(g, p);
        total += g.value(instance_loss(g, bp, inst, Mode::Eval, unused)).data[0];
    }
    return total / static_cast<double>(insts.size());
}

Adam make_adam(const HyperParams& hp) {
    AdamConfig cfg;
    cfg.lr = hp.lr;
    return Adam(cfg);
}

void register_all(Adam& opt, EncoderParams& p) {
    for (Tensor* t : p.tensors()) opt.register_param(*t);
}

void adam_apply(Adam& opt, EncoderParams& p, Graph& g, const BoundParams& bp) {
    std::vector<Tensor> grads = collect_grads(g, bp, p);
    std::vector<Tensor*> params = p.tensors();
    std::vector<const Tensor*> gptrs;
    gptrs.reserve(grads.size());
    for (const Tensor& t : grads) gptrs.push_back(&t);
    opt.step(params, gptrs);
}

template <typename T>
std::vector<T> shuffled(std::vector<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[rng.uniform_int(i)]);
    return items;
}

}  // namespace

PretrainResult pretrain(const std::vector<ForecastInstance>& train_instances,
                        const std::vector<ForecastInstance>& val_instances,
                        const HyperParams& hp, const TrainConfig& cfg,
                        const ProxyTrainState* resume) {
    cfg.validate();
    if (train_instances.empty())
        throw EngineError("pretrain: no valid forecast instances");

    ProxyTrainState st;
    Adam opt = make_adam(hp);
    if (resume) {
        st = *resume;
        opt.first_moments() = st.adam_m;
        opt.second_moments() = st.adam_v;
        opt.restore_step_count(st.adam_step);
    } else {
        Rng init_rng = Rng::substream(cfg.seed, "init");
        st.params = EncoderParams::init(hp, init_rng);
        st.params.attach_forecast_head(init_rng);
        st.best_params = st.params;
        st.best_val = std::numeric_limits<double>::infinity();
        register_all(opt, st.params);
    }

    PretrainResult res;
    res.initial_val_loss = eval_forecast_loss(st.params, val_instances);

    std::vector<std::size_t> order(train_instances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = st.next_epoch; epoch < cfg.max_proxy_epochs; ++epoch) {
        Rng shuffle_rng = Rng::substream(cfg.seed, "proxy-shuffle", epoch);
        Rng drng = Rng::substream(cfg.seed, "proxy-dropout", epoch);
        std::vector<std::size_t> idx = shuffled(order, shuffle_rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < idx.size(); start += cfg.batch) {
            std::size_t end = std::min(start + cfg.batch, idx.size());
            Graph g;
            BoundParams bp = bind(g, st.params);
            std::vector<Graph::Id> losses;
            for (std::size_t i = start; i < end; ++i)
                losses.push_back(instance_loss(g, bp, train_instances[idx[i]],
                                               Mode::Train, drng));
            Graph::Id total = losses[0];
            for (std::size_t i = 1; i < losses.size(); ++i)
                total = g.add(total, losses[i]);
            total = g.scale(total, 1.0 / static_cast<double>(end - start));
            g.backward(total);
            epoch_loss += g.value(total).data[0];
            ++batches;
            adam_apply(opt, st.params, g, bp);
        }
        st.train_loss.push_back(epoch_loss / static_cast<double>(batches));
        double vl = eval_forecast_loss(st.params, val_instances);
        st.val_loss.push_back(vl);
        st.next_epoch = epoch + 1;
        if (vl < st.best_val) {  // strict improvement; ties do not reset patience
            st.best_val = vl;
            st.best_epoch = epoch;
            st.best_params = st.params;
        } else if (epoch - st.best_epoch >= cfg.patience) {
            break;
        }
    }

    st.adam_m = opt.first_moments();
    st.adam_v = opt.second_moments();
    st.adam_step = opt.step_count();

    res.params = st.best_params;
    res.train_loss = st.train_loss;
    res.val_loss = st.val_loss;
    res.best_epoch = st.best_epoch;
    res.state = st;
    return res;
}

EncoderParams strip_head(const EncoderParams& pretrained) {
    EncoderParams p = pretrained;
    p.strip_forecast_head();
    return p;
}

std::vector<std::vector<double>> extract_representations(
    const std::vector<TimeSeriesSample>& samples, EncoderParams& params) {
    std::vector<std::vector<double>> reps;
    reps.reserve(samples.size());
    for (const auto& s : samples) reps.push_back(represent(s, params));
    return reps;
}

namespace {

double eval_classifier_loss(EncoderParams& p,
                            const std::vector<const TimeSeriesSample*>& samples,
                            const std::vector<int>& labels) {
    std::vector<std::vector<double>> logits;
    Rng unused(0);
    for (const auto* s : samples) {
        Graph g;
        BoundParams bp = bind(g, p);
        Graph::Id rep = encode_sample(g, bp, *s, Mode::Eval, unused);
        logits.push_back(g.value(classifier_logits(g, bp, rep)).data);
    }
    return classifier_loss(logits, labels);
}

}  // namespace

ClusterTrainResult cluster_train(const std::vector<TimeSeriesSample>& samples,
                                 const SplitSpec& split_spec,
                                 const EncoderParams& encoder, const TrainConfig& cfg,
                                 const IterationCallback& on_iteration) {
    cfg.validate();
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < samples.size(); ++i) index[samples[i].id] = i;
    std::vector<std::size_t> train_idx, val_idx;
    for (const auto& id : split_spec.train) {
        auto it = index.find(id);
        if (it == index.end()) throw DataError("cluster_train: unknown train id " + id);
        train_idx.push_back(it->second);
    }
    for (const auto& id : split_spec.val) {
        auto it = index.find(id);
        if (it == index.end()) throw DataError("cluster_train: unknown val id " + id);
        val_idx.push_back(it->second);
    }

    ClusterTrainResult res;
    res.params = encoder;
    res.params.hp.k = cfg.k;

    std::vector<int> prev_assignment;
    for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
        // (a) representations of all samples in eval mode
        auto reps = extract_representations(samples, res.params);

        // (b) k-means on the training split; validation gets nearest centroid
        std::vector<std::vector<double>> train_reps;
        train_reps.reserve(train_idx.size());
        for (std::size_t i : train_idx) train_reps.push_back(reps[i]);
        std::uint64_t km_seed =
            splitmix64(cfg.seed ^ hash_label("kmeans-iter") ^ (iter + 1));
        KMeansResult km = kmeans(train_reps, cfg.k, km_seed);
        std::vector<int> assignment(samples.size(), 0);
        for (std::size_t t = 0; t < train_idx.size(); ++t)
            assignment[train_idx[t]] = km.assignment[t];
        for (std::size_t i : val_idx)
            assignment[i] = static_cast<int>(nearest_centroid(reps[i], km.centroids));

        res.state.centroids = km.centroids;
        std::vector<std::size_t> sizes(cfg.k, 0);
        for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
        res.state.cluster_sizes.push_back(sizes);

        // (e) consecutive-iteration NMI over all samples
        if (iter > 0) res.state.nmi_trail.push_back(nmi(prev_assignment, assignment));
        prev_assignment = assignment;
        res.state.assignment = assignment;

        // (c) fresh classifier head; pseudo-label indices are arbitrary per
        // iteration, so a stale head carries no information
        Rng head_rng = Rng::substream(cfg.seed, "clf-init", iter);
        res.params.attach_classifier_head(head_rng);

        // (d) joint encoder+classifier training on the pseudo-labels
        std::vector<const TimeSeriesSample*> val_samples;
        std::vector<int> val_labels;
        for (std::size_t i : val_idx) {
            val_samples.push_back(&samples[i]);
            val_labels.push_back(assignment[i]);
        }
        Adam opt = make_adam(res.params.hp);
        register_all(opt, res.params);
        EncoderParams best_params = res.params;
        double best_val = eval_classifier_loss(res.params, val_samples, val_labels);
        std::size_t best_epoch = 0;
        for (std::size_t epoch = 0; epoch < cfg.epochs_per_iteration; ++epoch) {
            Rng shuffle_rng = Rng::substream(cfg.seed, "clf-shuffle", iter * 100000 + epoch);
            Rng drng = Rng::substream(cfg.seed, "clf-dropout", iter * 100000 + epoch);
            std::vector<std::size_t> idx = shuffled(train_idx, shuffle_rng);
            for (std::size_t start = 0; start < idx.size(); start += cfg.batch) {
                std::size_t end = std::min(start + cfg.batch, idx.size());
                Graph g;
                BoundParams bp = bind(g, res.params);
                Graph::Id total = -1;
                for (std::size_t i = start; i < end; ++i) {
                    const TimeSeriesSample& s = samples[idx[i]];
                    Graph::Id rep = encode_sample(g, bp, s, Mode::Train, drng);
                    Graph::Id probs = g.softmax_rows(classifier_logits(g, bp, rep));
                    Graph::Id picked = g.slice_cols(
                        probs, static_cast<std::size_t>(assignment[idx[i]]), 1);
                    Graph::Id nll = g.scale(g.log_(picked), -1.0);
                    total = (total < 0) ? nll : g.add(total, nll);
                }
                total = g.scale(total, 1.0 / static_cast<double>(end - start));
                g.backward(total);
                adam_apply(opt, res.params, g, bp);
            }
            double vl = eval_classifier_loss(res.params, val_samples, val_labels);
            if (vl < best_val) {
                best_val = vl;
                best_epoch = epoch + 1;
                best_params = res.params;
            } else if ((epoch + 1) - best_epoch >= cfg.patience) {
                break;
            }
        }
        res.params = best_params;
        res.iteration_val_loss.push_back(best_val);

        if (on_iteration) on_iteration(iter, assignment, res.params);
    }

    // final partition is the last k-means result; log classifier agreement
    std::size_t agree = 0;
    Rng unused(0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Graph g;
        BoundParams bp = bind(g, res.params);
        Graph::Id rep = encode_sample(g, bp, samples[i], Mode::Eval, unused);
        const auto& logits = g.value(classifier_logits(g, bp, rep)).data;
        std::size_t arg = static_cast<std::size_t>(
            std::max_element(logits.begin(), logits.end()) - logits.begin());
        if (static_cast<int>(arg) == res.state.assignment[i]) ++agree;
    }
    res.classifier_agreement =
        samples.empty() ? 0.0 : static_cast<double>(agree) / static_cast<double>(samples.size());
    return res;
}

}  // namespace slac
