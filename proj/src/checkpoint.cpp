#include "slac/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace slac {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

void save_checkpoint(const std::string& dir, const EncoderParams& params,
                     const std::map<std::string, Tensor>& extras,
                     const std::map<std::string, std::string>& meta,
                     const std::string& dtype) {
    if (dtype != "f64" && dtype != "f32")
        throw EngineError("checkpoint: unsupported dtype " + dtype);
    fs::create_directories(dir);
    nlohmann::json manifest;
    manifest["hyperparams"] = {
        {"blocks", params.hp.blocks},   {"dim", params.hp.dim},
        {"heads", params.hp.heads},     {"dropout", params.hp.dropout},
        {"lr", params.hp.lr},           {"num_ts", params.hp.num_ts},
        {"num_static", params.hp.num_static}, {"k", params.hp.k}};
    for (const auto& [key, val] : meta) manifest["meta"][key] = val;

    std::ofstream bin(fs::path(dir) / "weights.bin", std::ios::binary);
    if (!bin) throw EngineError("cannot write checkpoint weights in " + dir);
    nlohmann::json index = nlohmann::json::array();
    std::size_t offset = 0;
    auto dump = [&](const std::string& name, const Tensor& t) {
        index.push_back({{"name", name},
                         {"shape", t.shape},
                         {"offset", offset},
                         {"dtype", dtype}});
        if (dtype == "f32") {
            std::vector<float> narrow(t.data.begin(), t.data.end());
            bin.write(reinterpret_cast<const char*>(narrow.data()),
                      static_cast<std::streamsize>(narrow.size() * sizeof(float)));
            offset += narrow.size() * sizeof(float);
        } else {
            bin.write(reinterpret_cast<const char*>(t.data.data()),
                      static_cast<std::streamsize>(t.data.size() * sizeof(double)));
            offset += t.data.size() * sizeof(double);
        }
    };
    params.visit([&](const std::string& name, const Tensor& t) { dump(name, t); });
    for (const auto& [name, t] : extras) dump("extra." + name, t);
    manifest["tensors"] = index;

    std::ofstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw EngineError("cannot write checkpoint manifest in " + dir);
    mf << manifest.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw EngineError("cannot read checkpoint manifest in " + dir);
    nlohmann::json manifest = nlohmann::json::parse(mf);

    Checkpoint ck;
    const auto& hj = manifest.at("hyperparams");
    ck.params.hp.blocks = hj.at("blocks").get<std::size_t>();
    ck.params.hp.dim = hj.at("dim").get<std::size_t>();
    ck.params.hp.heads = hj.at("heads").get<std::size_t>();
    ck.params.hp.dropout = hj.at("dropout").get<double>();
    ck.params.hp.lr = hj.at("lr").get<double>();
    ck.params.hp.num_ts = hj.at("num_ts").get<std::size_t>();
    ck.params.hp.num_static = hj.at("num_static").get<std::size_t>();
    ck.params.hp.k = hj.at("k").get<std::size_t>();
    if (manifest.contains("meta"))
        for (auto it = manifest["meta"].begin(); it != manifest["meta"].end(); ++it)
            ck.meta[it.key()] = it.value().get<std::string>();

    std::ifstream bin(fs::path(dir) / "weights.bin", std::ios::binary);
    if (!bin) throw EngineError("cannot read checkpoint weights in " + dir);

    std::map<std::string, Tensor> loaded;
    std::vector<std::string> order;
    for (const auto& e : manifest.at("tensors")) {
        std::string name = e.at("name").get<std::string>();
        Tensor t;
        t.shape = e.at("shape").get<std::vector<std::size_t>>();
        t.data.resize(Tensor::count(t.shape));
        std::string dtype = e.value("dtype", "f64");
        bin.seekg(static_cast<std::streamoff>(e.at("offset").get<std::size_t>()));
        if (dtype == "f32") {
            std::vector<float> narrow(t.data.size());
            bin.read(reinterpret_cast<char*>(narrow.data()),
                     static_cast<std::streamsize>(narrow.size() * sizeof(float)));
            for (std::size_t i = 0; i < narrow.size(); ++i)
                t.data[i] = static_cast<double>(narrow[i]);
        } else if (dtype == "f64") {
            bin.read(reinterpret_cast<char*>(t.data.data()),
                     static_cast<std::streamsize>(t.data.size() * sizeof(double)));
        } else {
            throw EngineError("checkpoint in " + dir + " has unsupported dtype " + dtype);
        }
        if (!bin) throw EngineError("truncated checkpoint weights in " + dir);
        loaded[name] = std::move(t);
        order.push_back(name);
    }

    auto has = [&](const std::string& n) { return loaded.count(n) != 0; };
    ck.params.has_forecast_head = has("forecast.w");
    ck.params.has_classifier_head = has("classifier.w");
    ck.params.blocks.resize(ck.params.hp.blocks);
    ck.params.visit([&](const std::string& name, Tensor& t) {
        auto it = loaded.find(name);
        if (it == loaded.end())
            throw EngineError("checkpoint in " + dir + " is missing tensor " + name);
        t = it->second;
    });
    for (const auto& name : order)
        if (name.rfind("extra.", 0) == 0)
            ck.extras[name.substr(6)] = loaded[name];
    return ck;
}

std::vector<std::string> checkpoint_tensor_names(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw EngineError("cannot read checkpoint manifest in " + dir);
    nlohmann::json manifest = nlohmann::json::parse(mf);
    std::vector<std::string> names;
    for (const auto& e : manifest.at("tensors"))
        names.push_back(e.at("name").get<std::string>());
    return names;
}

}  // namespace slac
