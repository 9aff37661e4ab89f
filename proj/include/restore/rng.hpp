#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "restore/common.hpp"

namespace restore {

// splitmix64 step; used to spread seed material.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// One reproducible random stream, engine xoshiro256++ (Blackman & Vigna).
// Seeding is a handful of splitmix64 steps, so runs can afford one fresh
// stream per tour / per draw: streams derived from the same master seed and
// distinct stream ids are independent for practical purposes, and parallel
// schedules cannot change what any tour sees.
//
// All variate generation is implemented here (not via <random>) so the draw
// sequence is identical across standard library implementations: every normal
// consumes exactly two uniforms, every exponential exactly one.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) { reseed(seed, 0); }
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id) {
        reseed(master_seed, stream_id);
    }

    void reseed(std::uint64_t master_seed, std::uint64_t stream_id) {
        std::uint64_t s = master_seed ^ (0xda3e39cb94b95bdbULL * (stream_id + 1));
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t raw() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log argument.
    double uniform_pos() { return 1.0 - uniform(); }

    // Exponential with the given rate; rate 0 gives +infinity (clock never fires).
    double exponential(double rate) {
        if (rate < 0.0) throw DegenerateClockError("exponential clock with negative rate");
        if (rate == 0.0) return std::numeric_limits<double>::infinity();
        return -std::log(uniform_pos()) / rate;
    }

    // Standard normal via Box-Muller, stateless (the sine partner is discarded).
    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

}  // namespace restore
