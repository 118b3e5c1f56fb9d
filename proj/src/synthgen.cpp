#include "slac/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "slac/rng.hpp"

namespace slac {

double RegimeSpec::curve(std::size_t var, double t_hours) const {
    return baseline[var] + amplitude[var] * std::sin(frequency[var] * t_hours + phase[var]) +
           drift[var] * t_hours;
}

void validate(const GeneratorConfig& cfg, const std::vector<RegimeSpec>& regimes) {
    if (regimes.size() != cfg.k_true)
        throw DataError("generator: regime count != k_true");
    if (cfg.num_samples < cfg.k_true)
        throw DataError("generator: num_samples must be >= k_true");
    if (cfg.obs_rate <= 0.0) throw DataError("generator: obs_rate must be > 0");
    if (cfg.p_drop < 0.0 || cfg.p_drop >= 1.0)
        throw DataError("generator: p_drop must be in [0, 1)");
    double wsum = 0.0;
    for (const auto& r : regimes) {
        if (r.amplitude.size() != cfg.num_ts_vars || r.frequency.size() != cfg.num_ts_vars ||
            r.phase.size() != cfg.num_ts_vars || r.drift.size() != cfg.num_ts_vars ||
            r.baseline.size() != cfg.num_ts_vars)
            throw DataError("generator: regime curve parameter length != num_ts_vars");
        if (r.static_mean.size() != cfg.num_static_vars ||
            r.static_var.size() != cfg.num_static_vars)
            throw DataError("generator: regime static parameter length != num_static_vars");
        for (double v : r.static_var)
            if (v <= 0.0) throw DataError("generator: static variance must be > 0");
        wsum += r.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw DataError("generator: regime weights must sum to 1");
}

std::vector<TimeSeriesSample> generate(const GeneratorConfig& cfg,
                                       const std::vector<RegimeSpec>& regimes) {
    validate(cfg, regimes);
    std::vector<TimeSeriesSample> out;
    out.reserve(cfg.num_samples);
    for (std::size_t n = 0; n < cfg.num_samples; ++n) {
        Rng rng = Rng::substream(cfg.seed, "generator", n);
        double u = rng.uniform();
        std::size_t label = 0;
        double acc = 0.0;
        for (std::size_t r = 0; r < regimes.size(); ++r) {
            acc += regimes[r].weight;
            if (u < acc) { label = r; break; }
            label = r;
        }
        const RegimeSpec& reg = regimes[label];
        TimeSeriesSample s;
        s.id = "s" + std::to_string(n);
        s.truth_label = static_cast<int>(label);
        s.statics.resize(cfg.num_static_vars);
        for (std::size_t j = 0; j < cfg.num_static_vars; ++j)
            s.statics[j] = reg.static_mean[j] + std::sqrt(reg.static_var[j]) * rng.normal();
        // resample until at least one triplet exists
        for (int attempt = 0; attempt < 1000 && s.triplets.empty(); ++attempt) {
            for (std::size_t f = 0; f < cfg.num_ts_vars; ++f) {
                if (rng.uniform() < cfg.p_drop) continue;  // variable fully unobserved
                double t = rng.exponential(cfg.obs_rate);
                while (t <= cfg.horizon) {
                    double v = reg.curve(f, t) + cfg.noise_sigma * rng.normal();
                    s.triplets.push_back({t, f, v});
                    t += rng.exponential(cfg.obs_rate);
                }
            }
        }
        if (s.triplets.empty())
            throw DataError("generator: could not produce a non-empty sample; "
                            "obs_rate or p_drop is degenerate");
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::vector<double>> separation_report(const std::vector<RegimeSpec>& regimes,
                                                   double horizon) {
    if (regimes.size() < 2) throw DataError("separation_report: need >= 2 regimes");
    std::size_t k = regimes.size();
    std::size_t F = regimes[0].baseline.size();
    std::vector<std::vector<double>> d(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            double sq = 0.0;
            for (std::size_t f = 0; f < F; ++f)
                for (double t = 0.0; t <= horizon; t += 1.0) {
                    double diff = regimes[a].curve(f, t) - regimes[b].curve(f, t);
                    sq += diff * diff;
                }
            d[a][b] = d[b][a] = std::sqrt(sq);
        }
    return d;
}

std::vector<RegimeSpec> default_regimes(std::size_t k, std::size_t num_ts_vars,
                                        std::size_t num_static_vars) {
    std::vector<RegimeSpec> out;
    for (std::size_t r = 0; r < k; ++r) {
        RegimeSpec reg;
        double base = 2.0 * static_cast<double>(r) - static_cast<double>(k - 1);
        for (std::size_t f = 0; f < num_ts_vars; ++f) {
            double fr = static_cast<double>(f);
            reg.amplitude.push_back(1.0 + 0.5 * static_cast<double>(r));
            reg.frequency.push_back(0.05 + 0.02 * fr + 0.03 * static_cast<double>(r));
            reg.phase.push_back(0.7 * static_cast<double>(r) + 0.3 * fr);
            reg.drift.push_back(0.01 * (static_cast<double>(r) - 1.0));
            reg.baseline.push_back(base + 0.5 * fr);
        }
        for (std::size_t j = 0; j < num_static_vars; ++j) {
            reg.static_mean.push_back(1.5 * base + 0.25 * static_cast<double>(j));
            reg.static_var.push_back(0.25);
        }
        reg.weight = 1.0 / static_cast<double>(k);
        out.push_back(std::move(reg));
    }
    return out;
}

Vocabulary synthetic_vocabulary(const GeneratorConfig& cfg) {
    Vocabulary v;
    for (std::size_t f = 0; f < cfg.num_ts_vars; ++f)
        v.ts_vars.push_back("ts" + std::to_string(f));
    for (std::size_t j = 0; j < cfg.num_static_vars; ++j)
        v.static_vars.push_back("st" + std::to_string(j));
    v.horizon = cfg.horizon;
    return v;
}

namespace {
std::string fmt_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void write_dataset_csv(const std::vector<TimeSeriesSample>& samples,
                       const Vocabulary& vocab, const std::string& triplet_path,
                       const std::string& static_path, const std::string& truth_path) {
    {
        std::ofstream out(triplet_path);
        if (!out) throw DataError("cannot write " + triplet_path);
        out << "sample_id,time_hours,variable,value\n";
        for (const auto& s : samples)
            for (const auto& tr : s.triplets)
                out << s.id << ',' << fmt_real(tr.t) << ',' << vocab.ts_vars[tr.f] << ','
                    << fmt_real(tr.v) << '\n';
    }
    {
        std::ofstream out(static_path);
        if (!out) throw DataError("cannot write " + static_path);
        out << "sample_id,variable,value\n";
        for (const auto& s : samples)
            for (std::size_t j = 0; j < s.statics.size(); ++j)
                if (!std::isnan(s.statics[j]))
                    out << s.id << ',' << vocab.static_vars[j] << ','
                        << fmt_real(s.statics[j]) << '\n';
    }
    if (!truth_path.empty()) {
        std::ofstream out(truth_path);
        if (!out) throw DataError("cannot write " + truth_path);
        out << "sample_id,label\n";
        for (const auto& s : samples)
            if (s.truth_label)
                out << s.id << ',' << *s.truth_label << '\n';
    }
}

std::string GeneratorConfig::to_json(const std::vector<RegimeSpec>& regimes) const {
    nlohmann::json j;
    j["k_true"] = k_true;
    j["num_ts_vars"] = num_ts_vars;
    j["num_static_vars"] = num_static_vars;
    j["num_samples"] = num_samples;
    j["obs_rate"] = obs_rate;
    j["noise_sigma"] = noise_sigma;
    j["p_drop"] = p_drop;
    j["horizon"] = horizon;
    j["seed"] = seed;
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : regimes) {
        nlohmann::json rj;
        rj["amplitude"] = r.amplitude;
        rj["frequency"] = r.frequency;
        rj["phase"] = r.phase;
        rj["drift"] = r.drift;
        rj["baseline"] = r.baseline;
        rj["static_mean"] = r.static_mean;
        rj["static_var"] = r.static_var;
        rj["weight"] = r.weight;
        rs.push_back(rj);
    }
    j["regimes"] = rs;
    return j.dump(2);
}

std::pair<GeneratorConfig, std::vector<RegimeSpec>> GeneratorConfig::from_json(
    const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    GeneratorConfig c;
    auto req = [&](const char* field) -> const nlohmann::json& {
        if (!j.contains(field))
            throw DataError(std::string("generator config: missing field '") + field + "'");
        return j.at(field);
    };
    c.k_true = req("k_true").get<std::size_t>();
    c.num_ts_vars = req("num_ts_vars").get<std::size_t>();
    c.num_static_vars = req("num_static_vars").get<std::size_t>();
    c.num_samples = req("num_samples").get<std::size_t>();
    c.obs_rate = req("obs_rate").get<double>();
    c.noise_sigma = req("noise_sigma").get<double>();
    c.p_drop = j.value("p_drop", 0.0);
    c.horizon = j.value("horizon", 120.0);
    c.seed = req("seed").get<std::uint64_t>();
    std::vector<RegimeSpec> regimes;
    if (j.contains("regimes")) {
        for (const auto& rj : j.at("regimes")) {
            RegimeSpec r;
            r.amplitude = rj.at("amplitude").get<std::vector<double>>();
            r.frequency = rj.at("frequency").get<std::vector<double>>();
            r.phase = rj.at("phase").get<std::vector<double>>();
            r.drift = rj.at("drift").get<std::vector<double>>();
            r.baseline = rj.at("baseline").get<std::vector<double>>();
            r.static_mean = rj.at("static_mean").get<std::vector<double>>();
            r.static_var = rj.at("static_var").get<std::vector<double>>();
            r.weight = rj.at("weight").get<double>();
            regimes.push_back(std::move(r));
        }
    } else {
        regimes = default_regimes(c.k_true, c.num_ts_vars, c.num_static_vars);
    }
    return {c, regimes};
}

}  // namespace slac
