#include "slac/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "slac/rng.hpp"

namespace slac {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_real(const std::string& s, const std::string& file, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(file + ":" + std::to_string(lineno) + ": malformed value '" + s + "'");
    }
}

}  // namespace

std::optional<std::size_t> Vocabulary::ts_index(const std::string& name) const {
    auto it = std::find(ts_vars.begin(), ts_vars.end(), name);
    if (it == ts_vars.end()) return std::nullopt;
    return static_cast<std::size_t>(it - ts_vars.begin());
}

std::optional<std::size_t> Vocabulary::static_index(const std::string& name) const {
    auto it = std::find(static_vars.begin(), static_vars.end(), name);
    if (it == static_vars.end()) return std::nullopt;
    return static_cast<std::size_t>(it - static_vars.begin());
}

std::string Vocabulary::to_json() const {
    nlohmann::json j;
    j["time_series_variables"] = ts_vars;
    j["static_variables"] = static_vars;
    j["horizon_hours"] = horizon;
    if (has_stats) {
        nlohmann::json stats;
        for (std::size_t i = 0; i < ts_vars.size(); ++i)
            stats["time_series"][ts_vars[i]] = {{"mean", ts_stats[i].mean},
                                                {"std", ts_stats[i].stddev}};
        for (std::size_t i = 0; i < static_vars.size(); ++i)
            stats["static"][static_vars[i]] = {{"mean", static_stats[i].mean},
                                               {"std", static_stats[i].stddev}};
        j["stats"] = stats;
    }
    return j.dump(2);
}

Vocabulary Vocabulary::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Vocabulary v;
    v.ts_vars = j.at("time_series_variables").get<std::vector<std::string>>();
    v.static_vars = j.at("static_variables").get<std::vector<std::string>>();
    v.horizon = j.value("horizon_hours", 120.0);
    if (j.contains("stats")) {
        v.ts_stats.resize(v.ts_vars.size());
        v.static_stats.resize(v.static_vars.size());
        for (std::size_t i = 0; i < v.ts_vars.size(); ++i) {
            const auto& s = j["stats"]["time_series"].at(v.ts_vars[i]);
            v.ts_stats[i] = {s.at("mean").get<double>(), s.at("std").get<double>()};
        }
        for (std::size_t i = 0; i < v.static_vars.size(); ++i) {
            const auto& s = j["stats"]["static"].at(v.static_vars[i]);
            v.static_stats[i] = {s.at("mean").get<double>(), s.at("std").get<double>()};
        }
        v.has_stats = true;
    }
    return v;
}

std::string SplitSpec::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["train"] = train;
    j["val"] = val;
    return j.dump(2);
}

SplitSpec SplitSpec::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SplitSpec s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    return s;
}

std::vector<TimeSeriesSample> ingest_csv(const std::string& triplet_path,
                                         const std::string& static_path,
                                         const Vocabulary& vocab) {
    std::map<std::string, TimeSeriesSample> by_id;
    std::vector<std::string> order;
    double nan = std::numeric_limits<double>::quiet_NaN();

    auto get_sample = [&](const std::string& id) -> TimeSeriesSample& {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            TimeSeriesSample s;
            s.id = id;
            s.statics.assign(vocab.num_static(), nan);
            it = by_id.emplace(id, std::move(s)).first;
            order.push_back(id);
        }
        return it->second;
    };

    {
        std::ifstream in(triplet_path);
        if (!in) throw DataError("cannot open triplet file " + triplet_path);
        std::string line;
        std::size_t lineno = 0;
        std::set<std::tuple<std::string, double, std::size_t>> seen;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            if (lineno == 1) {
                if (line != "sample_id,time_hours,variable,value")
                    throw DataError(triplet_path + ": unexpected header '" + line + "'");
                continue;
            }
            auto f = split_csv_line(line);
            if (f.size() != 4)
                throw DataError(triplet_path + ":" + std::to_string(lineno) +
                                ": expected 4 fields, got " + std::to_string(f.size()));
            double t = parse_real(f[1], triplet_path, lineno);
            if (t < 0.0)
                throw DataError(triplet_path + ":" + std::to_string(lineno) +
                                ": negative time " + f[1]);
            auto fi = vocab.ts_index(f[2]);
            if (!fi)
                throw DataError(triplet_path + ":" + std::to_string(lineno) +
                                ": unknown variable " + f[2]);
            double v = parse_real(f[3], triplet_path, lineno);
            if (!seen.insert({f[0], t, *fi}).second)
                throw DataError(triplet_path + ":" + std::to_string(lineno) +
                                ": duplicate observation (" + f[0] + ", " + f[1] + ", " +
                                f[2] + ")");
            get_sample(f[0]).triplets.push_back({t, *fi, v});
        }
    }

    if (!static_path.empty()) {
        std::ifstream in(static_path);
        if (!in) throw DataError("cannot open static file " + static_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            if (lineno == 1) {
                if (line != "sample_id,variable,value")
                    throw DataError(static_path + ": unexpected header '" + line + "'");
                continue;
            }
            auto f = split_csv_line(line);
            if (f.size() != 3)
                throw DataError(static_path + ":" + std::to_string(lineno) +
                                ": expected 3 fields, got " + std::to_string(f.size()));
            auto di = vocab.static_index(f[1]);
            if (!di)
                throw DataError(static_path + ":" + std::to_string(lineno) +
                                ": unknown variable " + f[1]);
            get_sample(f[0]).statics[*di] = parse_real(f[2], static_path, lineno);
        }
    }

    std::vector<TimeSeriesSample> out;
    out.reserve(order.size());
    for (const auto& id : order) out.push_back(std::move(by_id[id]));
    return out;
}

void fit_normalization(const std::vector<TimeSeriesSample>& train_samples,
                       Vocabulary& vocab, std::vector<std::string>* warnings) {
    if (train_samples.empty()) throw DataError("fit_normalization: empty training split");
    std::size_t F = vocab.num_ts(), D = vocab.num_static();
    std::vector<double> sum(F, 0.0), sumsq(F, 0.0);
    std::vector<std::size_t> cnt(F, 0);
    for (const auto& s : train_samples)
        for (const auto& tr : s.triplets) {
            sum[tr.f] += tr.v;
            sumsq[tr.f] += tr.v * tr.v;
            ++cnt[tr.f];
        }
    vocab.ts_stats.assign(F, {});
    for (std::size_t j = 0; j < F; ++j) {
        if (cnt[j] == 0) {
            if (warnings)
                warnings->push_back("variable " + vocab.ts_vars[j] +
                                    " has no training observations; using mean 0, std 1");
            continue;
        }
        double n = static_cast<double>(cnt[j]);
        double mean = sum[j] / n;
        double var = sumsq[j] / n - mean * mean;  // population variance
        double sd = var > 0.0 ? std::sqrt(var) : 0.0;
        vocab.ts_stats[j] = {mean, sd > 0.0 ? sd : 1.0};
    }
    std::vector<double> ssum(D, 0.0), ssumsq(D, 0.0);
    std::vector<std::size_t> scnt(D, 0);
    for (const auto& s : train_samples)
        for (std::size_t j = 0; j < D && j < s.statics.size(); ++j)
            if (!std::isnan(s.statics[j])) {
                ssum[j] += s.statics[j];
                ssumsq[j] += s.statics[j] * s.statics[j];
                ++scnt[j];
            }
    vocab.static_stats.assign(D, {});
    for (std::size_t j = 0; j < D; ++j) {
        if (scnt[j] == 0) {
            if (warnings)
                warnings->push_back("static variable " + vocab.static_vars[j] +
                                    " unobserved in training split; using mean 0, std 1");
            continue;
        }
        double n = static_cast<double>(scnt[j]);
        double mean = ssum[j] / n;
        double var = ssumsq[j] / n - mean * mean;
        double sd = var > 0.0 ? std::sqrt(var) : 0.0;
        vocab.static_stats[j] = {mean, sd > 0.0 ? sd : 1.0};
    }
    vocab.has_stats = true;
}

TimeSeriesSample normalize(const TimeSeriesSample& s, const Vocabulary& vocab) {
    if (!vocab.has_stats) throw DataError("normalize: stats not fitted");
    TimeSeriesSample out = s;
    for (auto& tr : out.triplets) {
        const VarStats& st = vocab.ts_stats[tr.f];
        tr.v = (tr.v - st.mean) / st.stddev;
        tr.t = tr.t / vocab.horizon;
    }
    for (std::size_t j = 0; j < out.statics.size(); ++j) {
        if (std::isnan(out.statics[j])) continue;
        const VarStats& st = vocab.static_stats[j];
        out.statics[j] = (out.statics[j] - st.mean) / st.stddev;
    }
    return out;
}

TimeSeriesSample denormalize(const TimeSeriesSample& s, const Vocabulary& vocab) {
    if (!vocab.has_stats) throw DataError("denormalize: stats not fitted");
    TimeSeriesSample out = s;
    for (auto& tr : out.triplets) {
        const VarStats& st = vocab.ts_stats[tr.f];
        tr.v = tr.v * st.stddev + st.mean;
        tr.t = tr.t * vocab.horizon;
    }
    for (std::size_t j = 0; j < out.statics.size(); ++j) {
        if (std::isnan(out.statics[j])) continue;
        const VarStats& st = vocab.static_stats[j];
        out.statics[j] = out.statics[j] * st.stddev + st.mean;
    }
    return out;
}

void impute_static_mean(std::vector<TimeSeriesSample>& samples,
                        const std::vector<const TimeSeriesSample*>& train,
                        std::size_t num_static, std::vector<std::string>* warnings) {
    if (train.empty()) throw DataError("impute_static_mean: empty training split");
    std::vector<double> sum(num_static, 0.0);
    std::vector<std::size_t> cnt(num_static, 0);
    for (const auto* s : train)
        for (std::size_t j = 0; j < num_static && j < s->statics.size(); ++j)
            if (!std::isnan(s->statics[j])) {
                sum[j] += s->statics[j];
                ++cnt[j];
            }
    std::vector<double> mean(num_static, 0.0);
    for (std::size_t j = 0; j < num_static; ++j) {
        if (cnt[j] == 0) {
            if (warnings)
                warnings->push_back("static variable index " + std::to_string(j) +
                                    " missing in all training samples; imputing 0");
        } else {
            mean[j] = sum[j] / static_cast<double>(cnt[j]);
        }
    }
    for (auto& s : samples)
        for (std::size_t j = 0; j < num_static && j < s.statics.size(); ++j)
            if (std::isnan(s.statics[j])) s.statics[j] = mean[j];
}

ForecastBuildResult build_forecast_instances(
    const std::vector<TimeSeriesSample>& normalized_samples, const Vocabulary& vocab,
    const std::vector<double>& windows_hours, double pred_len_hours) {
    ForecastBuildResult res;
    std::size_t F = vocab.num_ts();
    for (const auto& s : normalized_samples) {
        for (double w_hours : windows_hours) {
            double w = w_hours / vocab.horizon;
            double w_end = (w_hours + pred_len_hours) / vocab.horizon;
            ForecastInstance inst;
            inst.sample_id = s.id;
            inst.window_hours = w_hours;
            inst.statics = s.statics;
            inst.mask.assign(F, 0.0);
            inst.target.assign(F, 0.0);
            std::vector<double> earliest_t(F, std::numeric_limits<double>::infinity());
            for (const auto& tr : s.triplets) {
                if (tr.t <= w) {
                    inst.observed.push_back(tr);
                } else if (tr.t <= w_end && tr.t < earliest_t[tr.f]) {
                    // earliest observation in (w, w+2] is the target
                    earliest_t[tr.f] = tr.t;
                    inst.mask[tr.f] = 1.0;
                    inst.target[tr.f] = tr.v;
                }
            }
            bool any_mask = std::any_of(inst.mask.begin(), inst.mask.end(),
                                        [](double m) { return m > 0.0; });
            if (inst.observed.empty() || !any_mask) {
                ++res.excluded;
                continue;
            }
            res.instances.push_back(std::move(inst));
        }
    }
    return res;
}

SplitSpec split(const std::vector<TimeSeriesSample>& samples, double train_ratio,
                std::uint64_t seed) {
    if (samples.size() < 5) throw DataError("split: need at least 5 samples");
    std::vector<std::string> ids;
    ids.reserve(samples.size());
    for (const auto& s : samples) ids.push_back(s.id);
    Rng rng = Rng::substream(seed, "split");
    for (std::size_t i = ids.size(); i > 1; --i)
        std::swap(ids[i - 1], ids[rng.uniform_int(i)]);
    std::size_t n_train = static_cast<std::size_t>(
        std::llround(train_ratio * static_cast<double>(ids.size())));
    n_train = std::min(std::max<std::size_t>(n_train, 1), ids.size() - 1);
    SplitSpec spec;
    spec.seed = seed;
    spec.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    spec.val.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
    return spec;
}

}  // namespace slac
