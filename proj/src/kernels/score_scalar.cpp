#include "csaidx/half.hpp"
#include "kernels/kernels_internal.hpp"

namespace csaidx::detail {

// Reference semantics. The dot runs in ascending d as a single chain, heads
// accumulate in ascending h; relu is (x < 0 ? 0 : x), which keeps -0.0 and
// mirrors the vector max against +0.0 exactly.
void score_scalar(const ScoreArgs& a, AccumulationMode mode) {
    const bool fp16 = (mode == AccumulationMode::fp16_emulated);
    const int64_t H = a.heads;
    const int64_t D = a.head_dim;

    for (int64_t b = 0; b < a.batch; ++b) {
        for (int64_t i = 0; i < a.rows; ++i) {
            const int64_t s = a.s0 + i;
            const float* qrow = a.q + ((b * a.seq_len + s) * H) * D;
            const float* wrow = a.w + (b * a.seq_len + s) * H;
            float* out_row = a.out + (b * a.rows + i) * a.cols;
            for (int64_t j = 0; j < a.cols; ++j) {
                const float* krow = a.kc + (b * a.key_blocks + (a.t0 + j)) * D;
                float acc = 0.0f;
                for (int64_t h = 0; h < H; ++h) {
                    const float* qh = qrow + h * D;
                    float dot = 0.0f;
                    for (int64_t d = 0; d < D; ++d) {
                        dot = dot + qh[d] * krow[d];
                    }
                    if (fp16) dot = half_round(dot);
                    const float rect = (dot < 0.0f) ? 0.0f : dot;
                    acc = acc + wrow[h] * rect;
                    if (fp16) acc = half_round(acc);
                }
                out_row[j] = acc;
            }
        }
    }
}

}  // namespace csaidx::detail
