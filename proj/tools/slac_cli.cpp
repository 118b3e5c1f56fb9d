// slac: pipeline driver for generate / pretrain / cluster / sweep /
// baseline / report. One JSON config drives a run; a handful of flags
// override the usual fields. Exit codes: 0 ok, 1 usage/config, 2 data,
// 3 numerical.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "slac/baseline.hpp"
#include "slac/checkpoint.hpp"
#include "slac/dataset.hpp"
#include "slac/metrics.hpp"
#include "slac/rng.hpp"
#include "slac/synthgen.hpp"
#include "slac/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slac;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hash_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the canonical dump
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// flag overrides shared by every subcommand
struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k;
    std::string out;
    std::string data;
    std::string precision;
};

struct RunConfig {
    json raw;
    std::uint64_t seed = 0;
    std::string out;
    std::string data_dir;
    std::string precision = "f64";
    double train_ratio = 0.8;
    HyperParams hp;
    TrainConfig train;
    GridSpec grid;
    std::vector<std::size_t> k_set{3, 4, 5};
    std::string hash;
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

RunConfig load_config(const Overrides& ov) {
    RunConfig c;
    c.raw = load_json(ov.config_path);
    const json& j = c.raw;
    try {
        if (!j.contains("seed")) throw UsageError("config: missing field 'seed'");
        c.seed = j.at("seed").get<std::uint64_t>();
        if (!j.contains("out")) throw UsageError("config: missing field 'out'");
        c.out = j.at("out").get<std::string>();
        c.data_dir = j.value("data", "");
        c.precision = j.value("precision", "f64");
        c.train_ratio = j.value("train_ratio", 0.8);
        if (j.contains("hyper")) {
            const json& h = j.at("hyper");
            c.hp.blocks = h.value("blocks", c.hp.blocks);
            c.hp.dim = h.value("dim", c.hp.dim);
            c.hp.heads = h.value("heads", c.hp.heads);
            c.hp.dropout = h.value("dropout", c.hp.dropout);
            c.hp.lr = h.value("lr", c.hp.lr);
        }
        if (j.contains("train")) {
            const json& t = j.at("train");
            c.train.batch = t.value("batch", c.train.batch);
            c.train.patience = t.value("patience", c.train.patience);
            c.train.max_proxy_epochs = t.value("max_proxy_epochs", c.train.max_proxy_epochs);
            c.train.iterations = t.value("iterations", c.train.iterations);
            c.train.epochs_per_iteration =
                t.value("epochs_per_iteration", c.train.epochs_per_iteration);
            c.train.k = t.value("k", c.train.k);
        }
        if (j.contains("grid")) {
            c.grid.step = j.at("grid").value("step", c.grid.step);
            c.grid.horizon = j.at("grid").value("horizon", c.grid.horizon);
        }
        if (j.contains("k_set")) c.k_set = j.at("k_set").get<std::vector<std::size_t>>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }

    // flags override the file; the hash covers the effective config
    json eff = c.raw;
    if (ov.seed) { c.seed = *ov.seed; eff["seed"] = c.seed; }
    if (ov.k) { c.train.k = *ov.k; eff["train"]["k"] = c.train.k; }
    if (!ov.out.empty()) { c.out = ov.out; eff["out"] = c.out; }
    if (!ov.data.empty()) { c.data_dir = ov.data; eff["data"] = c.data_dir; }
    if (!ov.precision.empty()) { c.precision = ov.precision; eff["precision"] = c.precision; }
    if (c.precision != "f64" && c.precision != "f32")
        throw UsageError("config: precision must be f32 or f64");
    c.train.seed = c.seed;
    c.hash = hash_hex(eff.dump());
    return c;
}

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw DataError("cannot write " + p.string());
    out << content;
}

// first line of every CLI-owned CSV carries the provenance tag
std::string csv_tag(const RunConfig& c) {
    return "# seed=" + std::to_string(c.seed) + " config_hash=" + c.hash + "\n";
}

json provenance(const RunConfig& c) {
    return json{{"seed", c.seed}, {"config_hash", c.hash}};
}

// --- data loading ---------------------------------------------------------

struct LoadedData {
    Vocabulary vocab;                         // with stats fitted on the split
    std::vector<TimeSeriesSample> raw;        // as ingested
    std::vector<TimeSeriesSample> normalized; // statics imputed, values z-scored
    SplitSpec split_spec;
    std::map<std::string, int> truth;         // empty when no truth file
};

fs::path data_file(const RunConfig& c, const char* name) {
    if (c.data_dir.empty()) throw UsageError("config: missing field 'data'");
    return fs::path(c.data_dir) / name;
}

LoadedData load_data(const RunConfig& c, bool write_split_to_out) {
    LoadedData d;
    fs::path vocab_path = data_file(c, "vocabulary.json");
    std::ifstream vf(vocab_path);
    if (!vf) throw DataError("cannot open vocabulary " + vocab_path.string());
    std::stringstream vs;
    vs << vf.rdbuf();
    d.vocab = Vocabulary::from_json(vs.str());

    d.raw = ingest_csv(data_file(c, "triplets.csv").string(),
                       data_file(c, "statics.csv").string(), d.vocab);

    fs::path split_path = data_file(c, "split.json");
    if (fs::exists(split_path)) {
        std::ifstream sf(split_path);
        std::stringstream ss;
        ss << sf.rdbuf();
        d.split_spec = SplitSpec::from_json(ss.str());
    } else {
        d.split_spec = split(d.raw, c.train_ratio,
                             splitmix64(c.seed ^ hash_label("split")));
        if (write_split_to_out)
            write_file(fs::path(c.out) / "split.json", d.split_spec.to_json());
    }

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < d.raw.size(); ++i) index[d.raw[i].id] = i;
    std::vector<const TimeSeriesSample*> train_samples;
    std::vector<TimeSeriesSample> train_copy;
    for (const auto& id : d.split_spec.train) {
        auto it = index.find(id);
        if (it == index.end()) throw DataError("split names unknown sample " + id);
        train_copy.push_back(d.raw[it->second]);
    }
    fit_normalization(train_copy, d.vocab);

    d.normalized = d.raw;
    for (const auto& id : d.split_spec.train)
        train_samples.push_back(&d.normalized[index.at(id)]);
    impute_static_mean(d.normalized, train_samples, d.vocab.num_static());
    for (auto& s : d.normalized) s = normalize(s, d.vocab);

    fs::path truth_path = data_file(c, "truth_labels.csv");
    if (fs::exists(truth_path)) {
        std::ifstream tf(truth_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(tf, line)) {
            ++lineno;
            if (line.empty() || lineno == 1) continue;
            auto comma = line.find(',');
            if (comma == std::string::npos)
                throw DataError(truth_path.string() + ":" + std::to_string(lineno) +
                                ": expected sample_id,label");
            d.truth[line.substr(0, comma)] = std::stoi(line.substr(comma + 1));
        }
    }
    return d;
}

std::optional<double> external_nmi(const LoadedData& d,
                                   const std::vector<int>& assignment) {
    if (d.truth.empty()) return std::nullopt;
    std::vector<int> truth;
    truth.reserve(d.normalized.size());
    for (const auto& s : d.normalized) {
        auto it = d.truth.find(s.id);
        if (it == d.truth.end()) return std::nullopt;  // partial truth: skip
        truth.push_back(it->second);
    }
    return nmi(truth, assignment);
}

void write_assignment_csv(const RunConfig& c, const fs::path& path,
                          const std::vector<TimeSeriesSample>& samples,
                          const std::vector<int>& assignment) {
    std::ostringstream out;
    out << csv_tag(c) << "sample_id,cluster\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
        out << samples[i].id << ',' << assignment[i] << '\n';
    write_file(path, out.str());
}

void write_representations_csv(const RunConfig& c, const fs::path& path,
                               const std::vector<TimeSeriesSample>& samples,
                               const std::vector<std::vector<double>>& reps) {
    std::ostringstream out;
    out << csv_tag(c) << "sample_id";
    for (std::size_t j = 0; j < reps[0].size(); ++j) out << ",c" << j;
    out << '\n';
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out << samples[i].id;
        for (double v : reps[i]) out << ',' << fmt_real(v);
        out << '\n';
    }
    write_file(path, out.str());
}

json report_body(const RunConfig& c, const std::string& method,
                 const ValidityReport& rep, std::optional<double> ext_nmi) {
    json r = provenance(c);
    r["method"] = method;
    r["k"] = rep.k;
    r["n"] = rep.n;
    r["indices"] = json::parse(rep.to_json());
    if (ext_nmi) r["external_nmi"] = *ext_nmi;
    return r;
}

// --- subcommands ----------------------------------------------------------

int cmd_generate(const RunConfig& c) {
    if (!c.raw.contains("generator"))
        throw UsageError("config: missing field 'generator'");
    GeneratorConfig gen;
    std::vector<RegimeSpec> regimes;
    try {
        std::tie(gen, regimes) = GeneratorConfig::from_json(c.raw.at("generator").dump());
        gen.seed = c.seed;  // all randomness hangs off the master seed
        validate(gen, regimes);
    } catch (const DataError& e) {  // a bad generator block is a config error
        throw UsageError(e.what());
    }
    auto samples = generate(gen, regimes);
    auto vocab = synthetic_vocabulary(gen);

    // the dataset lands where the pipeline commands will read it
    fs::path out = c.data_dir.empty() ? fs::path(c.out) : fs::path(c.data_dir);
    fs::create_directories(out);
    write_dataset_csv(samples, vocab, (out / "triplets.csv").string(),
                      (out / "statics.csv").string(),
                      (out / "truth_labels.csv").string());
    write_file(out / "vocabulary.json", vocab.to_json());
    write_file(out / "generator_config.json", gen.to_json(regimes));
    json manifest = provenance(c);
    manifest["command"] = "generate";
    manifest["num_samples"] = samples.size();
    manifest["files"] = {"triplets.csv", "statics.csv", "truth_labels.csv",
                         "vocabulary.json", "generator_config.json"};
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "generated " << samples.size() << " samples in " << c.out << "\n";
    return 0;
}

std::map<std::string, Tensor> pack_proxy_state(const ProxyTrainState& st) {
    std::map<std::string, Tensor> extras;
    for (std::size_t i = 0; i < st.adam_m.size(); ++i) {
        extras["adam_m." + std::to_string(i)] = st.adam_m[i];
        extras["adam_v." + std::to_string(i)] = st.adam_v[i];
    }
    extras["best_val"] = Tensor::scalar(st.best_val);
    extras["train_loss"] = Tensor::row(st.train_loss);
    extras["val_loss"] = Tensor::row(st.val_loss);
    return extras;
}

ProxyTrainState unpack_proxy_state(const Checkpoint& live, const Checkpoint& best) {
    ProxyTrainState st;
    st.params = live.params;
    st.best_params = best.params;
    for (std::size_t i = 0;; ++i) {
        auto m = live.extras.find("adam_m." + std::to_string(i));
        if (m == live.extras.end()) break;
        st.adam_m.push_back(m->second);
        st.adam_v.push_back(live.extras.at("adam_v." + std::to_string(i)));
    }
    st.best_val = live.extras.at("best_val").data[0];
    st.train_loss = live.extras.at("train_loss").data;
    st.val_loss = live.extras.at("val_loss").data;
    st.adam_step = std::stoull(live.meta.at("adam_step"));
    st.next_epoch = std::stoull(live.meta.at("next_epoch"));
    st.best_epoch = std::stoull(live.meta.at("best_epoch"));
    return st;
}

int cmd_pretrain(const RunConfig& cfg, bool resume) {
    auto data = load_data(cfg, true);
    HyperParams hp = cfg.hp;
    hp.num_ts = data.vocab.num_ts();
    hp.num_static = data.vocab.num_static();
    hp.k = cfg.train.k;
    hp.validate();

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < data.normalized.size(); ++i)
        index[data.normalized[i].id] = i;
    std::vector<TimeSeriesSample> train_set, val_set;
    for (const auto& id : data.split_spec.train)
        train_set.push_back(data.normalized[index.at(id)]);
    for (const auto& id : data.split_spec.val)
        val_set.push_back(data.normalized[index.at(id)]);
    auto train_inst = build_forecast_instances(train_set, data.vocab);
    auto val_inst = build_forecast_instances(val_set, data.vocab);
    std::cout << "forecast instances: " << train_inst.instances.size() << " train ("
              << train_inst.excluded << " excluded), " << val_inst.instances.size()
              << " val\n";

    fs::path out(cfg.out);
    fs::path live_dir = out / "checkpoints" / "pretrain";
    fs::path best_dir = out / "checkpoints" / "pretrain_best";

    ProxyTrainState resume_state;
    const ProxyTrainState* resume_ptr = nullptr;
    if (resume) {
        if (!fs::exists(live_dir / "manifest.json"))
            throw DataError("no pretrain checkpoint to resume in " + live_dir.string());
        resume_state = unpack_proxy_state(load_checkpoint(live_dir.string()),
                                          load_checkpoint(best_dir.string()));
        resume_ptr = &resume_state;
    }

    auto res = pretrain(train_inst.instances, val_inst.instances, hp, cfg.train,
                        resume_ptr);
    for (double v : res.val_loss)
        if (!std::isfinite(v)) throw EngineError("pretrain: non-finite validation loss");

    std::map<std::string, std::string> meta{
        {"seed", std::to_string(cfg.seed)},
        {"config_hash", cfg.hash},
        {"adam_step", std::to_string(res.state.adam_step)},
        {"next_epoch", std::to_string(res.state.next_epoch)},
        {"best_epoch", std::to_string(res.state.best_epoch)},
        {"stage", "pretrain"}};
    save_checkpoint(live_dir.string(), res.state.params, pack_proxy_state(res.state),
                    meta, cfg.precision);
    meta["stage"] = "pretrain_best";
    save_checkpoint(best_dir.string(), res.params, {}, meta, cfg.precision);
    write_file(out / "vocabulary.json", data.vocab.to_json());

    std::ostringstream hist;
    hist << csv_tag(cfg) << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < res.train_loss.size(); ++e)
        hist << e << ',' << fmt_real(res.train_loss[e]) << ','
             << fmt_real(res.val_loss[e]) << '\n';
    write_file(out / "loss_history.csv", hist.str());

    std::cout << "pretrained " << res.train_loss.size() << " epochs; best epoch "
              << res.best_epoch << ", val loss "
              << res.val_loss[res.best_epoch] << " (initial "
              << res.initial_val_loss << ")\n";
    return 0;
}

int cmd_cluster(const RunConfig& cfg, const std::string& checkpoint_flag) {
    auto data = load_data(cfg, true);
    fs::path out(cfg.out);
    fs::path ck_dir = checkpoint_flag.empty()
                          ? out / "checkpoints" / "pretrain_best"
                          : fs::path(checkpoint_flag);
    auto ck = load_checkpoint(ck_dir.string());
    EncoderParams encoder = strip_head(ck.params);

    std::size_t total = cfg.train.iterations;
    auto res = cluster_train(
        data.normalized, data.split_spec, encoder, cfg.train,
        [&](std::size_t iter, const std::vector<int>& assignment,
            EncoderParams& params) {
            std::string tag = "iter_" + std::to_string(iter);
            write_assignment_csv(cfg, out / "assignments" / (tag + ".csv"),
                                 data.normalized, assignment);
            save_checkpoint((out / "checkpoints" / tag).string(), params,
                            {},
                            {{"seed", std::to_string(cfg.seed)},
                             {"config_hash", cfg.hash},
                             {"iteration", std::to_string(iter)}},
                            cfg.precision);
            if ((iter + 1) % 10 == 0 || iter + 1 == total)
                std::cout << "iteration " << (iter + 1) << "/" << total << "\n";
        });

    for (double v : res.iteration_val_loss)
        if (!std::isfinite(v)) throw EngineError("cluster: non-finite validation loss");

    write_assignment_csv(cfg, out / "assignments" / "final.csv", data.normalized,
                         res.state.assignment);
    save_checkpoint((out / "checkpoints" / "final").string(), res.params, {},
                    {{"seed", std::to_string(cfg.seed)},
                     {"config_hash", cfg.hash},
                     {"stage", "final"}},
                    cfg.precision);

    std::ostringstream trail;
    trail << csv_tag(cfg) << "iteration,nmi\n";
    for (std::size_t t = 0; t < res.state.nmi_trail.size(); ++t)
        trail << (t + 1) << ',' << fmt_real(res.state.nmi_trail[t]) << '\n';
    write_file(out / "nmi_trail.csv", trail.str());

    std::ostringstream lh;
    lh << csv_tag(cfg) << "iteration,val_loss\n";
    for (std::size_t t = 0; t < res.iteration_val_loss.size(); ++t)
        lh << t << ',' << fmt_real(res.iteration_val_loss[t]) << '\n';
    write_file(out / "loss_history.csv", lh.str());

    auto reps = extract_representations(data.normalized, res.params);
    write_representations_csv(cfg, out / "representations.csv", data.normalized, reps);
    auto validity = validity_report(reps, res.state.assignment);
    json report = report_body(cfg, "slac", validity,
                              external_nmi(data, res.state.assignment));
    report["iterations"] = cfg.train.iterations;
    report["classifier_agreement"] = res.classifier_agreement;
    write_file(out / "report.json", report.dump(2) + "\n");

    std::cout << "clustered " << data.normalized.size() << " samples into k="
              << cfg.train.k << "; silhouette " << validity.silhouette << "\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& checkpoint_flag) {
    auto data = load_data(cfg, false);
    fs::path out(cfg.out);
    fs::path ck_dir;
    if (!checkpoint_flag.empty())
        ck_dir = checkpoint_flag;
    else if (fs::exists(out / "checkpoints" / "final" / "manifest.json"))
        ck_dir = out / "checkpoints" / "final";
    else
        ck_dir = out / "checkpoints" / "pretrain_best";
    auto ck = load_checkpoint(ck_dir.string());
    EncoderParams encoder = strip_head(ck.params);

    auto reps = extract_representations(data.normalized, encoder);
    auto reports = sweep_k(reps, cfg.k_set, cfg.seed);

    std::ostringstream csv;
    csv << csv_tag(cfg) << "k,silhouette,calinski_harabasz,dunn,davies_bouldin\n";
    json rows = json::array();
    for (std::size_t i = 0; i < cfg.k_set.size(); ++i) {
        const auto& r = reports[i];
        csv << cfg.k_set[i] << ',' << fmt_real(r.silhouette) << ','
            << fmt_real(r.calinski_harabasz) << ',' << fmt_real(r.dunn) << ','
            << fmt_real(r.davies_bouldin) << '\n';
        json row = json::parse(r.to_json());
        rows.push_back(row);
    }
    write_file(out / "sweep.csv", csv.str());
    json sj = provenance(cfg);
    sj["reports"] = rows;
    write_file(out / "sweep.json", sj.dump(2) + "\n");
    std::cout << "swept " << cfg.k_set.size() << " values of k\n";
    return 0;
}

int cmd_baseline(const RunConfig& cfg) {
    auto data = load_data(cfg, false);
    fs::path out = fs::path(cfg.out) / "baseline";
    auto res = baseline_cluster(data.normalized, data.vocab, cfg.train.k, cfg.grid,
                                cfg.seed);

    write_assignment_csv(cfg, out / "assignments" / "final.csv", data.normalized,
                         res.clustering.assignment);
    write_representations_csv(cfg, out / "representations.csv", data.normalized,
                              res.flattened);
    auto ext = external_nmi(data, res.clustering.assignment);
    json report = report_body(cfg, "baseline", res.report, ext);
    write_file(out / "report.json", report.dump(2) + "\n");

    json comparison = provenance(cfg);
    comparison["baseline"] = report;
    fs::path slac_report = fs::path(cfg.out) / "report.json";
    if (fs::exists(slac_report)) comparison["slac"] = load_json(slac_report.string());
    write_file(fs::path(cfg.out) / "comparison.json", comparison.dump(2) + "\n");
    std::cout << "baseline silhouette " << res.report.silhouette;
    if (ext) std::cout << ", external NMI " << *ext;
    std::cout << "\n";
    return 0;
}

// skips tag comments; returns rows of fields
std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        rows.push_back(std::move(fields));
    }
    return rows;
}

int cmd_report(const std::string& run_dir) {
    fs::path dir(run_dir);
    json report = load_json((dir / "report.json").string());

    auto reps_rows = read_csv(dir / "representations.csv");
    if (reps_rows.size() < 2) throw DataError("representations.csv has no data rows");
    std::vector<std::string> ids;
    std::vector<std::vector<double>> points;
    for (std::size_t i = 1; i < reps_rows.size(); ++i) {  // row 0 is the header
        ids.push_back(reps_rows[i][0]);
        std::vector<double> p;
        for (std::size_t j = 1; j < reps_rows[i].size(); ++j)
            p.push_back(std::stod(reps_rows[i][j]));
        points.push_back(std::move(p));
    }
    auto asg_rows = read_csv(dir / "assignments" / "final.csv");
    std::map<std::string, int> cluster;
    for (std::size_t i = 1; i < asg_rows.size(); ++i)
        cluster[asg_rows[i][0]] = std::stoi(asg_rows[i][1]);

    auto pca = pca_project(points);
    std::ostringstream out;
    out << "# seed=" << report.value("seed", 0ull)
        << " config_hash=" << report.value("config_hash", std::string("unknown"))
        << "\n";
    out << "sample_id,pc1,pc2,cluster\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
        out << ids[i] << ',' << fmt_real(pca.coords[i][0]) << ','
            << fmt_real(pca.coords[i][1]) << ',' << cluster.at(ids[i]) << '\n';
    write_file(dir / "pca.csv", out.str());

    std::cout << "run: " << run_dir << "\n";
    std::cout << "method: " << report.value("method", std::string("?")) << "\n";
    std::cout << "k: " << report.value("k", 0) << "  n: " << report.value("n", 0)
              << "\n";
    const json& idx = report.at("indices");
    auto show = [&](const char* name) {
        std::cout << "  " << name << ": " << idx.at(name).dump() << "\n";
    };
    show("silhouette");
    show("calinski_harabasz");
    show("dunn");
    show("davies_bouldin");
    if (report.contains("external_nmi"))
        std::cout << "  external_nmi: " << report["external_nmi"].get<double>() << "\n";

    fs::path trail_path = dir / "nmi_trail.csv";
    if (fs::exists(trail_path)) {
        auto rows = read_csv(trail_path);
        std::vector<double> trail;
        for (std::size_t i = 1; i < rows.size(); ++i)
            trail.push_back(std::stod(rows[i][1]));
        if (!trail.empty()) {
            std::size_t dec = std::max<std::size_t>(1, trail.size() / 10);
            double first = 0.0, last = 0.0;
            for (std::size_t i = 0; i < dec; ++i) {
                first += trail[i];
                last += trail[trail.size() - 1 - i];
            }
            std::cout << "nmi trail: first-decile mean " << (first / dec)
                      << ", last-decile mean " << (last / dec) << "\n";
        }
    }
    std::cout << "explained variance: pc1 " << pca.explained_variance_ratio[0]
              << ", pc2 " << pca.explained_variance_ratio[1] << "\n";
    std::cout << "wrote " << (dir / "pca.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse time-series clustering pipeline"};
    app.require_subcommand(1);

    Overrides ov;
    bool resume = false;
    std::string checkpoint_flag;
    std::string report_dir;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        if (needs_config)
            sub->add_option("-c,--config", ov.config_path, "run config JSON")
                ->required();
        sub->add_option("--seed", ov.seed, "override master seed");
        sub->add_option("--k", ov.k, "override cluster count");
        sub->add_option("--out", ov.out, "override output directory");
        sub->add_option("--data", ov.data, "override data directory");
        sub->add_option("--precision", ov.precision, "checkpoint precision (f32|f64)")
            ->check(CLI::IsMember({"f32", "f64"}));
    };

    auto* generate = app.add_subcommand("generate", "emit a synthetic dataset");
    add_common(generate);
    auto* pretrain_cmd = app.add_subcommand("pretrain", "proxy-task pretraining");
    add_common(pretrain_cmd);
    pretrain_cmd->add_flag("--resume", resume, "continue from the saved state");
    auto* cluster_cmd = app.add_subcommand("cluster", "alternating clustering");
    add_common(cluster_cmd);
    cluster_cmd->add_option("--checkpoint", checkpoint_flag, "encoder checkpoint dir");
    auto* sweep_cmd = app.add_subcommand("sweep", "validity indices across k");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--checkpoint", checkpoint_flag, "encoder checkpoint dir");
    auto* baseline_cmd = app.add_subcommand("baseline", "interpolation + k-means");
    add_common(baseline_cmd);
    auto* report_cmd = app.add_subcommand("report", "summarize a run directory");
    report_cmd->add_option("dir", report_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help is success; any parse failure is usage
    }

    try {
        if (report_cmd->parsed()) return cmd_report(report_dir);
        RunConfig cfg = load_config(ov);
        if (generate->parsed()) return cmd_generate(cfg);
        if (pretrain_cmd->parsed()) return cmd_pretrain(cfg, resume);
        if (cluster_cmd->parsed()) return cmd_cluster(cfg, checkpoint_flag);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg, checkpoint_flag);
        if (baseline_cmd->parsed()) return cmd_baseline(cfg);
        std::cerr << "error: unknown subcommand\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {  // engine / cluster / metric / numeric
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
