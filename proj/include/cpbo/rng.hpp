#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace cpbo {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded RNG wrapper; all stochastic behaviour in the library goes through
/// this so runs replay bit-for-bit from a config seed.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
    /// Uniform integer in [0, n).
    size_t index(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(eng_); }
    uint64_t next_u64() { return eng_(); }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

/// Scrambled radical-inverse (Halton) sequence over prime bases, one base per
/// coordinate. The digit permutation is derived from the scramble seed, so
/// different seeds give decorrelated but reproducible low-discrepancy streams.
class LowDiscrepancySeq {
  public:
    LowDiscrepancySeq(int dims, uint64_t scramble_seed) {
        static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
        for (int i = 0; i < dims; ++i) {
            const int base = primes[i % 12];
            bases_.push_back(base);
            perms_.push_back(make_perm(base, splitmix64(scramble_seed ^ (0x51ed2701ULL * (i + 1)))));
        }
    }

    /// Point #index of the sequence, coordinates in (0, 1).
    std::vector<double> point(uint64_t index) const {
        std::vector<double> out(bases_.size());
        for (size_t d = 0; d < bases_.size(); ++d) out[d] = radical_inverse(d, index);
        return out;
    }

  private:
    double radical_inverse(size_t dim, uint64_t index) const {
        const int base = bases_[dim];
        const auto& perm = perms_[dim];
        double inv_base = 1.0 / base, factor = inv_base, value = 0.0;
        // index+1 so the first draw is not exactly 0 in every coordinate
        uint64_t i = index + 1;
        while (i > 0) {
            value += factor * perm[i % base];
            i /= base;
            factor *= inv_base;
        }
        return value;
    }

    static std::vector<int> make_perm(int base, uint64_t seed) {
        std::vector<int> p(base);
        std::iota(p.begin(), p.end(), 0);
        // Fisher-Yates over digits 1..base-1; digit 0 stays put so leading
        // zeros of the expansion keep their meaning.
        uint64_t s = seed;
        for (int i = base - 1; i > 1; --i) {
            s = splitmix64(s);
            const int j = 1 + static_cast<int>(s % i);
            std::swap(p[i], p[j]);
        }
        return p;
    }

    std::vector<int> bases_;
    std::vector<std::vector<int>> perms_;
};

}  // namespace cpbo
