#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace creepuq {

/// Deterministic RNG. All variate generation is hand-rolled on top of
/// mt19937_64 because std::normal_distribution / std::shuffle are
/// implementation-defined and would break byte-identical reruns.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call; cached pair).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        // Rejection sampling keeps the draw unbiased.
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return static_cast<std::size_t>(v % n);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = index(i + 1);
            std::swap(v[i], v[j]);
        }
    }

    std::vector<double> normal_vector(std::size_t n) {
        std::vector<double> out(n);
        for (auto& x : out) x = normal();
        return out;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64 — used to derive independent per-task seeds from a root seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    return splitmix64(root ^ splitmix64(stream + 0x51ed2701ab0587d3ULL));
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
    // FNV-1a over the tag, mixed into the root.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return derive_seed(root, h);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t stream) {
    return derive_seed(derive_seed(root, tag), stream);
}

}  // namespace creepuq
