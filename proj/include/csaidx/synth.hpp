#pragma once

#include <cstdint>
#include <span>

#include "csaidx/types.hpp"

namespace csaidx {

// xoshiro256++ seeded through splitmix64, the reference construction. Each
// tensor draws from its own stream so regenerating one tensor never shifts
// another.
class Xoshiro256pp {
public:
    // Stream state is splitmix64 over (seed + stream * golden gamma).
    Xoshiro256pp(uint64_t seed, uint64_t stream);

    uint64_t next();

    // Uniform doubles from the high 53 bits.
    double next_unit_open();    // [0, 1)
    double next_unit_closed();  // (0, 1]

private:
    uint64_t s_[4];
};

// Tensor stream ids; fixed so files and in-memory generation agree.
inline constexpr uint64_t kStreamQueries = 1;
inline constexpr uint64_t kStreamKeys = 2;
inline constexpr uint64_t kStreamWeights = 3;

// Box-Muller in double precision, cast to fp32 after scaling.
void fill_gaussian(std::span<float> out, double stddev, uint64_t seed, uint64_t stream);

struct SyntheticSpec {
    ProblemDims dims;
    uint64_t seed = 1;
    // Model hidden size; only documents where the weight scale comes from.
    int64_t hidden_dim = 7168;
};

// q, kc ~ N(0, 1/d_h); w ~ N(0, 1/(d_h * H_I)). Same seed, same bytes.
IndexerInputs generate_inputs(const SyntheticSpec& spec);

}  // namespace csaidx
