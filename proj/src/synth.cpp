#include "csaidx/synth.hpp"

#include <cmath>
#include <numbers>

namespace csaidx {

namespace {

// splitmix64; reference constants.
uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256pp::Xoshiro256pp(uint64_t seed, uint64_t stream) {
    // Golden-gamma spacing keeps per-tensor streams decorrelated while
    // remaining reproducible from (seed, stream) alone.
    uint64_t sm = seed + stream * 0x9E3779B97F4A7C15ULL;
    for (uint64_t& s : s_) s = splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is absorbing
}

uint64_t Xoshiro256pp::next() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Xoshiro256pp::next_unit_open() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Xoshiro256pp::next_unit_closed() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
}

void fill_gaussian(std::span<float> out, double stddev, uint64_t seed, uint64_t stream) {
    Xoshiro256pp rng(seed, stream);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    size_t i = 0;
    while (i < out.size()) {
        // Box-Muller in double; u1 is in (0, 1] so the log is finite.
        const double u1 = rng.next_unit_closed();
        const double u2 = rng.next_unit_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        out[i++] = static_cast<float>(r * std::cos(two_pi * u2) * stddev);
        if (i < out.size()) {
            out[i++] = static_cast<float>(r * std::sin(two_pi * u2) * stddev);
        }
    }
}

IndexerInputs generate_inputs(const SyntheticSpec& spec) {
    const ProblemDims& d = spec.dims;
    std::vector<float> q(d.q_elems());
    std::vector<float> kc(d.kc_elems());
    std::vector<float> w(d.w_elems());

    const double unit_scale = 1.0 / std::sqrt(static_cast<double>(d.head_dim));
    const double weight_scale =
        1.0 / std::sqrt(static_cast<double>(d.head_dim) * static_cast<double>(d.heads));

    fill_gaussian(q, unit_scale, spec.seed, kStreamQueries);
    fill_gaussian(kc, unit_scale, spec.seed, kStreamKeys);
    fill_gaussian(w, weight_scale, spec.seed, kStreamWeights);

    return IndexerInputs::validated(std::move(q), std::move(kc), std::move(w), d);
}

}  // namespace csaidx
