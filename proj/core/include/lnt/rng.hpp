#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace lnt {

/// Fixed-increment SplitMix64 (Steele-Lea-Flood); used only to derive
/// substream states.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// xoshiro256++ with a documented substream derivation: the generator for
/// chunk c of a run seeded with s starts from four SplitMix64 outputs taken
/// at state s + (c + 1) * 0x9E3779B97F4A7C15. Streams are therefore a pure
/// function of (seed, chunk index), independent of thread scheduling.
class Xoshiro256pp {
public:
    static Xoshiro256pp substream(std::uint64_t seed, std::uint64_t stream) {
        SplitMix64 sm(seed + (stream + 1) * 0x9E3779B97F4A7C15ULL);
        Xoshiro256pp g;
        g.s_[0] = sm.next();
        g.s_[1] = sm.next();
        g.s_[2] = sm.next();
        g.s_[3] = sm.next();
        if ((g.s_[0] | g.s_[1] | g.s_[2] | g.s_[3]) == 0) g.s_[0] = 0x9E3779B97F4A7C15ULL;
        return g;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1).
    double uniform01() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    /// Fills out with independent standard normals via Box-Muller. Consumption
    /// is fixed at two uniforms per pair (the spare of an odd-length fill is
    /// discarded), so stream positions stay aligned across calls.
    void fill_normals(std::span<double> out) {
        constexpr double two_pi = 6.283185307179586476925287;
        for (std::size_t k = 0; k < out.size(); k += 2) {
            const double r = std::sqrt(-2.0 * std::log(uniform01()));
            const double theta = two_pi * uniform01();
            out[k] = r * std::cos(theta);
            if (k + 1 < out.size()) out[k + 1] = r * std::sin(theta);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4] = {};
};

}  // namespace lnt
