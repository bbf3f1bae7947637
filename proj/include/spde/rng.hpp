#pragma once

#include <cstdint>
#include <random>

namespace spde {

/// splitmix64 step; the usual 64-bit finalizer used for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed-splitting rule used everywhere a derived stream is needed (per noise
/// mode, per ensemble member, per sweep point). Two finalizer rounds over
/// (master, stream_id) make distinct ids independent for practical purposes.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
    std::uint64_t s = master ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1));
    splitmix64(s);
    return splitmix64(s);
}

/// Deterministic stream of standard normals: mt19937_64 bits mapped through
/// an explicit Box-Muller transform. std::normal_distribution is not pinned
/// by the standard, so it is avoided for reproducibility.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite; u2 in [0,1).
        const double u1 =
            (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace spde
