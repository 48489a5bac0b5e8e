#pragma once

#include <cstdint>
#include <vector>

#include "csaidx/memory_ledger.hpp"
#include "csaidx/types.hpp"

namespace csaidx {

enum class AccumulationMode {
    fp32,
    // Rounds to binary16 (round to nearest even, saturating at +/-65504)
    // after each per-head dot product and after each head's contribution is
    // added. Storage stays fp32; only the rounding points change.
    fp16_emulated,
};

// Inner kernel servicing score_tile. auto_detect resolves to the widest
// variant the CPU supports; scalar is the portable reference. Both variants
// execute the identical rounding sequence per score, so fp32 results are bit
// equal across kernels.
enum class ScoreKernel {
    auto_detect,
    scalar,
    avx2,
};

bool avx2_kernels_available();
ScoreKernel resolve_score_kernel(ScoreKernel requested, int64_t head_dim);
const char* score_kernel_name(ScoreKernel kernel);

// One dense tile of indexer scores, rows = query positions [s0, s0+rows),
// cols = key blocks [t0, t0+cols). Owns its ledger charge of
// batch*rows*cols*4 bytes, released on destruction.
struct ScoreTile {
    int64_t batch = 0;
    int64_t rows = 0;
    int64_t cols = 0;
    int64_t s0 = 0;
    int64_t t0 = 0;
    std::vector<float> scores;  // [B, rows, cols]
    LedgerCharge charge;

    [[nodiscard]] float* row(int64_t b, int64_t i) {
        return scores.data() + (b * rows + i) * cols;
    }
    [[nodiscard]] const float* row(int64_t b, int64_t i) const {
        return scores.data() + (b * rows + i) * cols;
    }
    [[nodiscard]] float& at(int64_t b, int64_t i, int64_t j) { return row(b, i)[j]; }
    [[nodiscard]] float at(int64_t b, int64_t i, int64_t j) const { return row(b, i)[j]; }
};

// scores[b, i, j] = sum_h w[b, s0+i, h] * relu(q[b, s0+i, h, :] . kc[b, t0+j, :])
// with relu(x) = (x < 0 ? 0 : x). The dot accumulates in ascending d and the
// head reduction in ascending h, in every kernel and mode; that fixed order
// is what makes fp32 runs bit reproducible across tilings and kernels.
// Out-of-range tiles throw std::invalid_argument; a non-finite fp32 score
// throws std::runtime_error (emulated fp16 saturates instead).
ScoreTile score_tile(const IndexerInputs& inputs, const ProblemDims& dims,
                     int64_t s0, int64_t t0, int64_t rows, int64_t cols,
                     AccumulationMode mode, MemoryLedger& ledger,
                     ScoreKernel kernel = ScoreKernel::auto_detect);

}  // namespace csaidx
