#pragma once

#include "hsi/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace hsi {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

// Uniform on [0, 1) with 53 random bits; independent of the standard library's
// distribution implementations so files stay reproducible across toolchains.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Marsaglia polar method.
inline double std_normal(Rng& rng) {
    for (;;) {
        const double a = 2.0 * uniform01(rng) - 1.0;
        const double b = 2.0 * uniform01(rng) - 1.0;
        const double s = a * a + b * b;
        if (s > 0.0 && s < 1.0) return a * std::sqrt(-2.0 * std::log(s) / s);
    }
}

inline Vec gaussian_vec(int d, Rng& rng, double sd = 1.0) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = sd * std_normal(rng);
    return v;
}

inline Vec random_unit(int d, Rng& rng) {
    for (;;) {
        Vec v = gaussian_vec(d, rng);
        const double n = v.norm();
        if (n > 1e-12) return v / n;
    }
}

}  // namespace hsi
