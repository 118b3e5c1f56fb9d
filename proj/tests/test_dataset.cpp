#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "doctest.h"
#include "slac/dataset.hpp"
#include "slac/rng.hpp"

using namespace slac;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("slac_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& content) const {
        fs::path p = path / name;
        std::ofstream(p) << content;
        return p.string();
    }
};

Vocabulary tiny_vocab() {
    Vocabulary v;
    v.ts_vars = {"hr", "gcs"};
    v.static_vars = {"age", "weight"};
    return v;
}

}  // namespace

TEST_CASE("ingest: counts samples and preserves triplet order") {
    TempDir d;
    auto triplets = d.file("t.csv",
                           "sample_id,time_hours,variable,value\n"
                           "a,5,hr,80\n"
                           "a,2,gcs,14\n"
                           "b,1,hr,90\n");
    auto statics = d.file("s.csv", "sample_id,variable,value\na,age,40\n");
    auto samples = ingest_csv(triplets, statics, tiny_vocab());
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].id == "a");
    CHECK(samples[0].triplets.size() == 2);
    CHECK(samples[0].triplets[0].t == 5.0);  // order as given, not sorted
    CHECK(samples[1].triplets.size() == 1);
    CHECK(samples[0].statics[0] == 40.0);
    CHECK(std::isnan(samples[0].statics[1]));
}

TEST_CASE("ingest: negative time names the row") {
    TempDir d;
    auto triplets = d.file("t.csv",
                           "sample_id,time_hours,variable,value\na,-1,hr,80\n");
    auto statics = d.file("s.csv", "sample_id,variable,value\n");
    try {
        ingest_csv(triplets, statics, tiny_vocab());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("ingest: unknown variable rejected") {
    TempDir d;
    Vocabulary v;
    v.ts_vars = {"hr"};
    auto triplets = d.file("t.csv",
                           "sample_id,time_hours,variable,value\n"
                           "a,1,hr,80\na,2,gcs,14\n");
    auto statics = d.file("s.csv", "sample_id,variable,value\n");
    try {
        ingest_csv(triplets, statics, v);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("unknown variable gcs") != std::string::npos);
    }
}

TEST_CASE("ingest: duplicate (id, t, f) rejected") {
    TempDir d;
    auto triplets = d.file("t.csv",
                           "sample_id,time_hours,variable,value\n"
                           "a,1,hr,80\na,1,hr,82\n");
    auto statics = d.file("s.csv", "sample_id,variable,value\n");
    CHECK_THROWS_AS(ingest_csv(triplets, statics, tiny_vocab()), DataError);
}

TEST_CASE("ingest: malformed row reports line number") {
    TempDir d;
    auto triplets = d.file("t.csv",
                           "sample_id,time_hours,variable,value\na,xx,hr,80\n");
    auto statics = d.file("s.csv", "sample_id,variable,value\n");
    try {
        ingest_csv(triplets, statics, tiny_vocab());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("fit_normalization: population std and degenerate rules") {
    Vocabulary v = tiny_vocab();
    TimeSeriesSample s1, s2;
    s1.id = "a";
    s1.triplets = {{1, 0, 1.0}, {2, 1, 5.0}};
    s2.id = "b";
    s2.triplets = {{1, 0, 3.0}, {2, 1, 5.0}, {3, 1, 5.0}};
    std::vector<std::string> warnings;
    fit_normalization({s1, s2}, v, &warnings);
    CHECK(v.ts_stats[0].mean == doctest::Approx(2.0));
    CHECK(v.ts_stats[0].stddev == doctest::Approx(1.0));  // population std of {1,3}
    CHECK(v.ts_stats[1].mean == doctest::Approx(5.0));
    CHECK(v.ts_stats[1].stddev == 1.0);  // constant variable -> std 1
}

TEST_CASE("fit_normalization: unobserved variable defaults with warning") {
    Vocabulary v = tiny_vocab();
    TimeSeriesSample s;
    s.id = "a";
    s.triplets = {{1, 0, 2.0}};
    std::vector<std::string> warnings;
    fit_normalization({s}, v, &warnings);
    CHECK(v.ts_stats[1].mean == 0.0);
    CHECK(v.ts_stats[1].stddev == 1.0);
    CHECK(!warnings.empty());
}

TEST_CASE("normalize: z-score units and scaled time") {
    Vocabulary v = tiny_vocab();
    TimeSeriesSample s;
    s.id = "a";
    s.statics = {40.0, 70.0};
    s.triplets = {{120.0, 0, 10.0}, {60.0, 0, 14.0}};
    fit_normalization({s}, v);
    auto n = normalize(s, v);
    CHECK(n.triplets[0].t == doctest::Approx(1.0));  // 120 h / 120 h horizon
    CHECK(n.triplets[0].v == doctest::Approx(-1.0)); // mean 12, std 2
    CHECK(n.triplets[1].v == doctest::Approx(1.0));
    // round trip within 1e-12
    auto back = denormalize(n, v);
    for (std::size_t i = 0; i < s.triplets.size(); ++i) {
        CHECK(std::abs(back.triplets[i].t - s.triplets[i].t) < 1e-12 * 120);
        CHECK(std::abs(back.triplets[i].v - s.triplets[i].v) < 1e-12 * 20);
    }
    for (std::size_t i = 0; i < s.statics.size(); ++i)
        CHECK(std::abs(back.statics[i] - s.statics[i]) < 1e-9);
}

TEST_CASE("impute_static_mean") {
    double nan = std::numeric_limits<double>::quiet_NaN();
    TimeSeriesSample t1, t2, target;
    t1.statics = {9.0, 4.0};
    t2.statics = {9.0, 4.0};
    target.statics = {1.0, nan};
    std::vector<TimeSeriesSample> all{t1, t2, target};
    std::vector<const TimeSeriesSample*> train{&all[0], &all[1]};
    impute_static_mean(all, train, 2);
    CHECK(all[2].statics[0] == 1.0);
    CHECK(all[2].statics[1] == 4.0);

    SUBCASE("no missing entries unchanged") {
        CHECK(all[0].statics == std::vector<double>{9.0, 4.0});
    }
    SUBCASE("all entries missing -> all train means") {
        TimeSeriesSample empty;
        empty.statics = {nan, nan};
        std::vector<TimeSeriesSample> v{empty};
        impute_static_mean(v, train, 2);
        CHECK(v[0].statics == std::vector<double>{9.0, 4.0});
    }
}

TEST_CASE("build_forecast_instances: window and inclusion rules") {
    Vocabulary v = tiny_vocab();
    v.ts_stats = {{0.0, 1.0}, {0.0, 1.0}};
    v.static_stats = {{0.0, 1.0}, {0.0, 1.0}};
    v.has_stats = true;

    TimeSeriesSample s;
    s.id = "a";
    s.statics = {0.0, 0.0};
    s.triplets = {{10.0, 0, 1.0}, {25.0, 1, 2.0}};
    auto n = normalize(s, v);

    SUBCASE("observation at 25 h masks in for window 24") {
        auto res = build_forecast_instances({n}, v, {24.0});
        REQUIRE(res.instances.size() == 1);
        const auto& inst = res.instances[0];
        CHECK(inst.observed.size() == 1);
        CHECK(inst.mask == std::vector<double>{0.0, 1.0});
        CHECK(inst.target[1] == doctest::Approx(2.0));
        CHECK(inst.target[0] == 0.0);
    }
    SUBCASE("empty observation window excludes the pair") {
        TimeSeriesSample late;
        late.id = "b";
        late.statics = {0.0, 0.0};
        late.triplets = {{30.0, 0, 1.0}, {25.0, 1, 2.0}};
        auto res = build_forecast_instances({normalize(late, v)}, v, {24.0});
        CHECK(res.instances.empty());
        CHECK(res.excluded == 1);
    }
    SUBCASE("earliest observation in the window is the target") {
        TimeSeriesSample multi;
        multi.id = "c";
        multi.statics = {0.0, 0.0};
        multi.triplets = {{1.0, 0, 9.0}, {24.5, 0, 7.0}, {25.5, 0, 8.0}};
        auto res = build_forecast_instances({normalize(multi, v)}, v, {24.0});
        REQUIRE(res.instances.size() == 1);
        CHECK(res.instances[0].target[0] == doctest::Approx(7.0));
    }
}

TEST_CASE("forecast instances: mask matches brute-force scan on random samples") {
    Vocabulary v = tiny_vocab();
    v.ts_stats = {{0.0, 1.0}, {0.0, 1.0}};
    v.static_stats = {{0.0, 1.0}, {0.0, 1.0}};
    v.has_stats = true;
    Rng rng(123);
    std::vector<double> windows{24, 48, 72, 96, 118};
    for (int rep = 0; rep < 30; ++rep) {
        TimeSeriesSample s;
        s.id = "r" + std::to_string(rep);
        s.statics = {0.0, 0.0};
        std::size_t n = 1 + rng.uniform_int(15);
        for (std::size_t i = 0; i < n; ++i)
            s.triplets.push_back({rng.uniform(0.0, 120.0),
                                  static_cast<std::size_t>(rng.uniform_int(2)),
                                  rng.uniform(-1.0, 1.0)});
        auto norm = normalize(s, v);
        auto res = build_forecast_instances({norm}, v, windows);
        CHECK(res.instances.size() + res.excluded == windows.size());
        std::set<double> seen_windows;
        for (const auto& inst : res.instances) seen_windows.insert(inst.window_hours);
        for (double w : windows) {
            // brute-force oracle over raw hours
            std::vector<int> mask(2, 0);
            bool any_obs = false;
            for (const auto& tr : s.triplets) {
                if (tr.t <= w) any_obs = true;
                if (tr.t > w && tr.t <= w + 2.0) mask[tr.f] = 1;
            }
            bool included = any_obs && (mask[0] || mask[1]);
            CHECK(seen_windows.count(w) == (included ? 1u : 0u));
            if (included) {
                for (const auto& inst : res.instances)
                    if (inst.window_hours == w)
                        for (std::size_t j = 0; j < 2; ++j)
                            CHECK(inst.mask[j] == static_cast<double>(mask[j]));
            }
        }
    }
}

TEST_CASE("split: sizes, determinism, seed sensitivity") {
    std::vector<TimeSeriesSample> samples(10);
    for (std::size_t i = 0; i < samples.size(); ++i)
        samples[i].id = "s" + std::to_string(i);
    auto sp = split(samples, 0.8, 1);
    CHECK(sp.train.size() == 8);
    CHECK(sp.val.size() == 2);
    auto sp2 = split(samples, 0.8, 1);
    CHECK(sp.train == sp2.train);
    CHECK(sp.val == sp2.val);

    std::vector<TimeSeriesSample> big(100);
    for (std::size_t i = 0; i < big.size(); ++i) big[i].id = "s" + std::to_string(i);
    CHECK(split(big, 0.8, 1).train != split(big, 0.8, 2).train);

    std::set<std::string> all(sp.train.begin(), sp.train.end());
    all.insert(sp.val.begin(), sp.val.end());
    CHECK(all.size() == samples.size());  // disjoint cover

    std::vector<TimeSeriesSample> few(4);
    for (std::size_t i = 0; i < few.size(); ++i) few[i].id = "f" + std::to_string(i);
    CHECK_THROWS_AS(split(few, 0.8, 1), DataError);
}

TEST_CASE("vocabulary and split spec JSON round trips") {
    Vocabulary v = tiny_vocab();
    TimeSeriesSample s;
    s.id = "a";
    s.triplets = {{1, 0, 2.0}, {2, 1, 3.0}};
    fit_normalization({s}, v);
    Vocabulary v2 = Vocabulary::from_json(v.to_json());
    CHECK(v2.ts_vars == v.ts_vars);
    CHECK(v2.static_vars == v.static_vars);
    CHECK(v2.has_stats);
    CHECK(v2.ts_stats[0].mean == v.ts_stats[0].mean);
    CHECK(v2.ts_stats[0].stddev == v.ts_stats[0].stddev);

    SplitSpec sp;
    sp.seed = 7;
    sp.train = {"a", "b"};
    sp.val = {"c"};
    SplitSpec sp2 = SplitSpec::from_json(sp.to_json());
    CHECK(sp2.seed == 7);
    CHECK(sp2.train == sp.train);
    CHECK(sp2.val == sp.val);
}
