#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace slac {

// Counter-based generator: every stream is a (key, counter) pair pushed
// through splitmix64. Substreams are derived from a master seed and a
// label so that components (split, init, dropout, kmeans, generator)
// can be re-seeded independently without sharing state.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t key) : key_(key), counter_(0) {}

    static Rng substream(std::uint64_t master, std::string_view label,
                         std::uint64_t index = 0) {
        std::uint64_t k = splitmix64(master ^ hash_label(label));
        k = splitmix64(k ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
        return Rng(k);
    }

    std::uint64_t next_u64() { return splitmix64(key_ ^ counter_++); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) {
        std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // next inter-arrival gap of a rate-lambda Poisson process
    double exponential(double lambda) {
        double u;
        do { u = uniform(); } while (u == 0.0);
        return -std::log(u) / lambda;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace slac
