#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

#include "evalkit/common.hpp"

namespace evk {

// Self-contained generator so that seeded runs are bit-identical across
// standard-library implementations (std distributions are not portable).
// splitmix64 passes BigCrush and is more than adequate for Monte-Carlo
// property checks.
inline std::uint64_t splitmix64_next(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// One root seed per run; every consumer derives its own stream from
// (root, label), so adding a consumer never shifts another stream.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
    std::uint64_t h = 14695981039346656037ULL;  // FNV-1a over the label bytes
    for (unsigned char c : label) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::uint64_t s = h ^ (root * 0x9e3779b97f4a7c15ULL);
    splitmix64_next(s);
    return splitmix64_next(s);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                 std::uint64_t index) {
    std::uint64_t s = derive_seed(root, label) ^
                      (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    splitmix64_next(s);
    return splitmix64_next(s);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    Rng(std::uint64_t root, std::string_view label)
        : state_(derive_seed(root, label)) {}

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // uniform on [0, 1), 53-bit resolution
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform_open() {  // (0, 1]
        return 1.0 - uniform();
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform_open();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double exponential() { return -std::log(uniform_open()); }

    double lognormal(double mu, double sigma) {
        return std::exp(mu + sigma * normal());
    }

    double chi_squared(int df) {
        double s = 0.0;
        for (int i = 0; i < df; i++) {
            double z = normal();
            s += z * z;
        }
        return s;
    }

    double student_t(int df) {
        return normal() / std::sqrt(chi_squared(df) / df);
    }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // Lemire-style rejection to avoid modulo bias
        std::uint64_t x = next_u64();
        __uint128_t m = (__uint128_t)x * n;
        std::uint64_t lo = (std::uint64_t)m;
        if (lo < n) {
            std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                x = next_u64();
                m = (__uint128_t)x * n;
                lo = (std::uint64_t)m;
            }
        }
        return (std::uint64_t)(m >> 64);
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; i--) {
            std::size_t j = (std::size_t)below(i);
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace evk
