// End-to-end tests driving the installed binary. The binary path arrives
// as argv[1]; everything runs inside a throwaway directory.
#define DOCTEST_CONFIG_IMPLEMENT
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string g_binary;
fs::path g_work;

struct RunResult {
    int code = -1;
    std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
    std::string cmd = g_binary + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, pipe))
        res.output.append(buf, n);
    int status = pclose(pipe);
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t data_rows(const fs::path& csv) {
    std::ifstream in(csv);
    REQUIRE(in.good());
    std::string line;
    std::size_t rows = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        ++rows;
    }
    return rows;
}

void write_config(const fs::path& path, const fs::path& out, const fs::path& data,
                  const std::string& extra_train = "", std::size_t max_epochs = 4) {
    std::ofstream cfg(path);
    cfg << R"({
  "seed": 42,
  "out": ")" << out.string() << R"(",
  "data": ")" << data.string() << R"(",
  "generator": {
    "k_true": 2, "num_ts_vars": 3, "num_static_vars": 2,
    "num_samples": 24, "obs_rate": 0.08, "noise_sigma": 0.3, "p_drop": 0.2,
    "seed": 0
  },
  "hyper": {"dim": 8, "blocks": 1, "heads": 2, "dropout": 0.1, "lr": 0.003},
  "train": {"batch": 8, "patience": 5, "max_proxy_epochs": )"
        << max_epochs << R"(, "iterations": 3, "epochs_per_iteration": 2, "k": 2)"
        << extra_train << R"(},
  "k_set": [2, 3]
})";
}

}  // namespace

TEST_CASE("generate: files, determinism, config errors") {
    fs::path dir = g_work / "gen";
    fs::create_directories(dir);
    fs::path cfg = dir / "config.json";
    write_config(cfg, dir / "run", dir / "data");

    auto res = run("generate -c " + cfg.string());
    CHECK(res.code == 0);
    for (const char* f : {"triplets.csv", "statics.csv", "truth_labels.csv",
                          "vocabulary.json", "manifest.json"})
        CHECK(fs::exists(dir / "data" / f));
    CHECK(read_file(dir / "data" / "manifest.json").find("\"seed\": 42") !=
          std::string::npos);

    // rerun into a second directory: byte-identical CSVs
    auto res2 = run("generate -c " + cfg.string() + " --data " +
                    (dir / "data2").string());
    CHECK(res2.code == 0);
    CHECK(read_file(dir / "data" / "triplets.csv") ==
          read_file(dir / "data2" / "triplets.csv"));
    CHECK(read_file(dir / "data" / "statics.csv") ==
          read_file(dir / "data2" / "statics.csv"));

    // a different seed changes the data
    auto res3 = run("generate -c " + cfg.string() + " --data " +
                    (dir / "data3").string() + " --seed 43");
    CHECK(res3.code == 0);
    CHECK(read_file(dir / "data" / "triplets.csv") !=
          read_file(dir / "data3" / "triplets.csv"));

    // config missing a generator field names it and exits 1
    fs::path bad = dir / "bad.json";
    std::ofstream(bad) << R"({"seed": 1, "out": "x", "generator": {"k_true": 2}})";
    auto res4 = run("generate -c " + bad.string());
    CHECK(res4.code == 1);
    CHECK(res4.output.find("num_ts_vars") != std::string::npos);
}

TEST_CASE("pretrain: history, checkpoints, resume reproducibility") {
    fs::path dir = g_work / "pre";
    fs::create_directories(dir);
    fs::path cfg = dir / "config.json";
    write_config(cfg, dir / "run", dir / "data");
    REQUIRE(run("generate -c " + cfg.string()).code == 0);

    auto res = run("pretrain -c " + cfg.string());
    CHECK(res.code == 0);
    CHECK(fs::exists(dir / "run" / "checkpoints" / "pretrain" / "manifest.json"));
    CHECK(fs::exists(dir / "run" / "checkpoints" / "pretrain_best" / "weights.bin"));
    CHECK(fs::exists(dir / "run" / "split.json"));
    CHECK(data_rows(dir / "run" / "loss_history.csv") == 4);  // one row per epoch
    CHECK(read_file(dir / "run" / "loss_history.csv").rfind("# seed=42", 0) == 0);

    // interrupted run + resume matches the one-shot history byte for byte
    fs::path cfg_short = dir / "short.json";
    write_config(cfg_short, dir / "run_short", dir / "data", "", 2);
    REQUIRE(run("pretrain -c " + cfg_short.string()).code == 0);
    CHECK(data_rows(dir / "run_short" / "loss_history.csv") == 2);
    fs::path cfg_resumed = dir / "resumed.json";
    write_config(cfg_resumed, dir / "run_short", dir / "data", "", 4);
    REQUIRE(run("pretrain -c " + cfg_resumed.string() + " --resume").code == 0);

    auto strip_tag = [](std::string s) {  // config hashes legitimately differ
        return s.substr(s.find('\n') + 1);
    };
    CHECK(strip_tag(read_file(dir / "run_short" / "loss_history.csv")) ==
          strip_tag(read_file(dir / "run" / "loss_history.csv")));
    CHECK(read_file(dir / "run_short" / "checkpoints" / "pretrain_best" / "weights.bin") ==
          read_file(dir / "run" / "checkpoints" / "pretrain_best" / "weights.bin"));

    // resume without a checkpoint is a data error
    fs::path cfg_eco = dir / "eco.json";
    write_config(cfg_eco, dir / "run_empty", dir / "data");
    CHECK(run("pretrain -c " + cfg_eco.string() + " --resume").code == 2);
}

TEST_CASE("cluster, sweep, baseline, report on one run directory") {
    fs::path dir = g_work / "full";
    fs::create_directories(dir);
    fs::path cfg = dir / "config.json";
    write_config(cfg, dir / "run", dir / "data");
    REQUIRE(run("generate -c " + cfg.string()).code == 0);
    REQUIRE(run("pretrain -c " + cfg.string()).code == 0);

    auto res = run("cluster -c " + cfg.string());
    CHECK(res.code == 0);
    for (int t = 0; t < 3; ++t) {
        CHECK(fs::exists(dir / "run" / "assignments" /
                         ("iter_" + std::to_string(t) + ".csv")));
        CHECK(fs::exists(dir / "run" / "checkpoints" /
                         ("iter_" + std::to_string(t)) / "weights.bin"));
    }
    CHECK(data_rows(dir / "run" / "assignments" / "final.csv") == 24);
    CHECK(data_rows(dir / "run" / "nmi_trail.csv") == 2);  // iterations - 1
    std::string report = read_file(dir / "run" / "report.json");
    CHECK(report.find("\"k\": 2") != std::string::npos);
    CHECK(report.find("\"seed\": 42") != std::string::npos);
    CHECK(report.find("config_hash") != std::string::npos);
    CHECK(report.find("external_nmi") != std::string::npos);
    CHECK(report.find("silhouette") != std::string::npos);

    // identical rerun reproduces the assignments exactly
    auto final_before = read_file(dir / "run" / "assignments" / "final.csv");
    REQUIRE(run("cluster -c " + cfg.string()).code == 0);
    CHECK(read_file(dir / "run" / "assignments" / "final.csv") == final_before);

    auto sweep = run("sweep -c " + cfg.string());
    CHECK(sweep.code == 0);
    CHECK(data_rows(dir / "run" / "sweep.csv") == 2);  // one row per k
    std::string sweep_csv = read_file(dir / "run" / "sweep.csv");
    CHECK(sweep_csv.find("k,silhouette,calinski_harabasz,dunn,davies_bouldin") !=
          std::string::npos);
    auto sweep_again = run("sweep -c " + cfg.string());
    CHECK(sweep_again.code == 0);
    CHECK(read_file(dir / "run" / "sweep.csv") == sweep_csv);

    auto baseline = run("baseline -c " + cfg.string());
    CHECK(baseline.code == 0);
    std::string comparison = read_file(dir / "run" / "comparison.json");
    CHECK(comparison.find("\"baseline\"") != std::string::npos);
    CHECK(comparison.find("\"slac\"") != std::string::npos);

    auto report_res = run("report " + (dir / "run").string());
    CHECK(report_res.code == 0);
    CHECK(report_res.output.find("silhouette") != std::string::npos);
    CHECK(report_res.output.find("nmi trail") != std::string::npos);
    CHECK(data_rows(dir / "run" / "pca.csv") == 24);
    std::string pca = read_file(dir / "run" / "pca.csv");
    CHECK(pca.find("sample_id,pc1,pc2,cluster") != std::string::npos);

    // same schema for the baseline directory
    auto report_base = run("report " + (dir / "run" / "baseline").string());
    CHECK(report_base.code == 0);
    CHECK(data_rows(dir / "run" / "baseline" / "pca.csv") == 24);
    std::string bpca = read_file(dir / "run" / "baseline" / "pca.csv");
    CHECK(bpca.find("sample_id,pc1,pc2,cluster") != std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(run("").code == 1);                         // missing subcommand
    CHECK(run("frobnicate").code == 1);               // unknown subcommand
    CHECK(run("cluster").code == 1);                  // missing --config
    CHECK(run("generate -c /nope/missing.json").code == 1);
    CHECK(run("--help").code == 0);

    // syntactically valid config pointing at absent data: data error
    fs::path dir = g_work / "codes";
    fs::create_directories(dir);
    fs::path cfg = dir / "config.json";
    write_config(cfg, dir / "run", dir / "no_such_data");
    CHECK(run("pretrain -c " + cfg.string()).code == 2);

    // malformed value in an otherwise-present data file
    write_config(cfg, dir / "run", dir / "data");
    REQUIRE(run("generate -c " + cfg.string()).code == 0);
    std::ofstream(dir / "data" / "triplets.csv", std::ios::app) << "s0,bogus,ts0,1\n";
    CHECK(run("pretrain -c " + cfg.string()).code == 2);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-binary> [doctest args]\n");
        return 2;
    }
    g_binary = argv[1];
    char tmpl[] = "/tmp/slac_cli_XXXXXX";
    if (!mkdtemp(tmpl)) return 2;
    g_work = tmpl;

    doctest::Context ctx;
    ctx.applyCommandLine(argc - 1, argv + 1);
    int rc = ctx.run();
    fs::remove_all(g_work);
    return rc;
}
