#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace flowsampler {

// Counter-based random streams. Every draw is a pure function of
// (seed, stream, counter), so per-particle noise can be generated in any
// order, by any number of workers, without changing the result.

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a;
    std::uint64_t h = splitmix64(s);
    s ^= b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return splitmix64(s);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix(mix(a, b), c);
}

} // namespace rng

/// Deterministic scalar stream keyed by an arbitrary 64-bit value.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : state_(key) {}

    /// Uniform in (0, 1]; never returns 0 so log() is safe.
    double uniform01() {
        return static_cast<double>((rng::splitmix64(state_) >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; caches the second draw of each pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    Eigen::VectorXd normal_vector(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Normal draws for one particle at one step of a seeded dynamics.
inline Eigen::VectorXd particle_noise(std::uint64_t seed, std::uint64_t counter,
                                      std::uint64_t particle, int dim) {
    RandomStream s(rng::mix(seed, counter, particle));
    return s.normal_vector(dim);
}

} // namespace flowsampler
