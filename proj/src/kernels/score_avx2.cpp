#include <immintrin.h>

#include <algorithm>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "kernels/kernels_internal.hpp"

namespace csaidx::detail {

namespace {

// Round each lane through binary16, clamping lanes that land on infinity to
// +/-65504. Bit-identical to half_round(): both sides are IEEE round to
// nearest even with the same saturation fixup.
inline __m256 half_round_vec(__m256 x) {
    const __m128i h = _mm256_cvtps_ph(x, _MM_FROUND_TO_NEAREST_INT);
    const __m256 y = _mm256_cvtph_ps(h);
    const __m256 abs_mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7FFFFFFF));
    const __m256 inf = _mm256_set1_ps(std::numeric_limits<float>::infinity());
    const __m256 is_inf = _mm256_cmp_ps(_mm256_and_ps(y, abs_mask), inf, _CMP_EQ_OQ);
    const __m256 sign_mask = _mm256_castsi256_ps(_mm256_set1_epi32(static_cast<int>(0x80000000u)));
    const __m256 clamped = _mm256_or_ps(_mm256_and_ps(y, sign_mask), _mm256_set1_ps(65504.0f));
    return _mm256_blendv_ps(y, clamped, is_inf);
}

// One head's contribution: optional fp16 rounding of the dot, relu as
// max(+0, x) which matches the scalar (x < 0 ? 0 : x) branch lane for lane
// (including -0.0), then the weighted add in ascending head order.
inline __m256 head_update(__m256 acc, __m256 dot, float wh, bool fp16) {
    if (fp16) dot = half_round_vec(dot);
    dot = _mm256_max_ps(_mm256_setzero_ps(), dot);
    acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_set1_ps(wh), dot));
    if (fp16) acc = half_round_vec(acc);
    return acc;
}

}  // namespace

// Eight key blocks per vector; each lane runs the scalar op sequence for its
// own column, so results match score_scalar bit for bit. Four head chains run
// interleaved to hide add latency; their final accumulation stays in
// ascending head order, which keeps the rounding sequence intact.
void score_avx2(const ScoreArgs& a, AccumulationMode mode) {
    const int64_t H = a.heads;
    const int64_t D = a.head_dim;
    if (D > kAvx2MaxHeadDim) {
        throw std::invalid_argument("score_avx2: head_dim exceeds panel capacity");
    }
    const bool fp16 = (mode == AccumulationMode::fp16_emulated);

    alignas(32) float panel[8 * kAvx2MaxHeadDim];
    alignas(32) float spill[8];

    for (int64_t b = 0; b < a.batch; ++b) {
        for (int64_t j0 = 0; j0 < a.cols; j0 += 8) {
            const int64_t wj = std::min<int64_t>(8, a.cols - j0);
            // Pack the key panel transposed: panel[d][lane] = kc[t0+j0+lane][d].
            // Dead lanes are zero; they compute a harmless finite score that
            // is never stored.
            for (int64_t lane = 0; lane < wj; ++lane) {
                const float* krow =
                    a.kc + (b * a.key_blocks + (a.t0 + j0 + lane)) * D;
                for (int64_t d = 0; d < D; ++d) {
                    panel[d * 8 + lane] = krow[d];
                }
            }
            if (wj < 8) {
                for (int64_t lane = wj; lane < 8; ++lane) {
                    for (int64_t d = 0; d < D; ++d) {
                        panel[d * 8 + lane] = 0.0f;
                    }
                }
            }

            for (int64_t i = 0; i < a.rows; ++i) {
                const int64_t s = a.s0 + i;
                const float* qrow = a.q + ((b * a.seq_len + s) * H) * D;
                const float* wrow = a.w + (b * a.seq_len + s) * H;
                __m256 acc = _mm256_setzero_ps();

                int64_t h = 0;
                for (; h + 4 <= H; h += 4) {
                    const float* q0 = qrow + (h + 0) * D;
                    const float* q1 = qrow + (h + 1) * D;
                    const float* q2 = qrow + (h + 2) * D;
                    const float* q3 = qrow + (h + 3) * D;
                    __m256 d0 = _mm256_setzero_ps();
                    __m256 d1 = _mm256_setzero_ps();
                    __m256 d2 = _mm256_setzero_ps();
                    __m256 d3 = _mm256_setzero_ps();
                    for (int64_t d = 0; d < D; ++d) {
                        const __m256 kv = _mm256_load_ps(panel + d * 8);
                        d0 = _mm256_add_ps(d0, _mm256_mul_ps(_mm256_set1_ps(q0[d]), kv));
                        d1 = _mm256_add_ps(d1, _mm256_mul_ps(_mm256_set1_ps(q1[d]), kv));
                        d2 = _mm256_add_ps(d2, _mm256_mul_ps(_mm256_set1_ps(q2[d]), kv));
                        d3 = _mm256_add_ps(d3, _mm256_mul_ps(_mm256_set1_ps(q3[d]), kv));
                    }
                    acc = head_update(acc, d0, wrow[h + 0], fp16);
                    acc = head_update(acc, d1, wrow[h + 1], fp16);
                    acc = head_update(acc, d2, wrow[h + 2], fp16);
                    acc = head_update(acc, d3, wrow[h + 3], fp16);
                }
                for (; h < H; ++h) {
                    const float* qh = qrow + h * D;
                    __m256 dot = _mm256_setzero_ps();
                    for (int64_t d = 0; d < D; ++d) {
                        const __m256 kv = _mm256_load_ps(panel + d * 8);
                        dot = _mm256_add_ps(dot, _mm256_mul_ps(_mm256_set1_ps(qh[d]), kv));
                    }
                    acc = head_update(acc, dot, wrow[h], fp16);
                }

                float* out_row = a.out + (b * a.rows + i) * a.cols + j0;
                if (wj == 8) {
                    _mm256_storeu_ps(out_row, acc);
                } else {
                    _mm256_store_ps(spill, acc);
                    std::memcpy(out_row, spill, static_cast<size_t>(wj) * sizeof(float));
                }
            }
        }
    }
}

}  // namespace csaidx::detail
