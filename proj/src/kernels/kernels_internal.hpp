#pragma once

#include <cstdint>

#include "csaidx/score.hpp"

namespace csaidx::detail {

// Raw tile-scoring arguments shared by the kernel variants. Pointers are the
// full operand arrays; the kernel addresses the (s0, t0) window itself.
struct ScoreArgs {
    const float* q;
    const float* kc;
    const float* w;
    int64_t batch;
    int64_t seq_len;
    int64_t key_blocks;
    int64_t heads;
    int64_t head_dim;
    int64_t s0;
    int64_t t0;
    int64_t rows;
    int64_t cols;
    float* out;  // [batch, rows, cols]
};

void score_scalar(const ScoreArgs& args, AccumulationMode mode);

#if defined(CSAIDX_X86_KERNELS)
// Column-lane AVX2 variant: eight key blocks per vector, each lane replaying
// the scalar rounding sequence. head_dim above this cap falls back to scalar
// (the packed key panel lives on the stack).
inline constexpr int64_t kAvx2MaxHeadDim = 512;

void score_avx2(const ScoreArgs& args, AccumulationMode mode);

// Separate TU compiled with -mf16c; called only behind a runtime CPU check.
float half_round_f16c_raw(float x);
#endif

}  // namespace csaidx::detail
