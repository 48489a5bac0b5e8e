#include "csaidx/score.hpp"

#include <cmath>
#include <stdexcept>

#include "kernels/kernels_internal.hpp"

namespace csaidx {

bool avx2_kernels_available() {
#if defined(CSAIDX_X86_KERNELS)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("f16c");
#else
    return false;
#endif
}

ScoreKernel resolve_score_kernel(ScoreKernel requested, int64_t head_dim) {
#if defined(CSAIDX_X86_KERNELS)
    if (requested == ScoreKernel::auto_detect) {
        if (avx2_kernels_available() && head_dim <= detail::kAvx2MaxHeadDim) {
            return ScoreKernel::avx2;
        }
        return ScoreKernel::scalar;
    }
    if (requested == ScoreKernel::avx2) {
        if (!avx2_kernels_available()) {
            throw std::invalid_argument("avx2 kernel requested but CPU lacks AVX2/F16C");
        }
        if (head_dim > detail::kAvx2MaxHeadDim) {
            throw std::invalid_argument("avx2 kernel requested but head_dim exceeds its panel");
        }
        return ScoreKernel::avx2;
    }
    return ScoreKernel::scalar;
#else
    if (requested == ScoreKernel::avx2) {
        throw std::invalid_argument("avx2 kernel requested on a non-x86 build");
    }
    (void)head_dim;
    return ScoreKernel::scalar;
#endif
}

const char* score_kernel_name(ScoreKernel kernel) {
    switch (kernel) {
        case ScoreKernel::auto_detect: return "auto";
        case ScoreKernel::scalar: return "scalar";
        case ScoreKernel::avx2: return "avx2";
    }
    return "unknown";
}

ScoreTile score_tile(const IndexerInputs& inputs, const ProblemDims& dims,
                     int64_t s0, int64_t t0, int64_t rows, int64_t cols,
                     AccumulationMode mode, MemoryLedger& ledger, ScoreKernel kernel) {
    if (rows < 1 || cols < 1 || s0 < 0 || t0 < 0 || s0 + rows > dims.seq_len ||
        t0 + cols > dims.key_blocks) {
        throw std::invalid_argument("score_tile: tile out of range");
    }

    ScoreTile tile;
    tile.batch = dims.batch;
    tile.rows = rows;
    tile.cols = cols;
    tile.s0 = s0;
    tile.t0 = t0;
    tile.charge = LedgerCharge(ledger, "score_tile",
                               chunk_tile_bytes(dims.batch, rows, cols));
    tile.scores.resize(dims.batch * rows * cols);

    detail::ScoreArgs args{
        inputs.q.data(), inputs.kc.data(), inputs.w.data(),
        dims.batch, dims.seq_len, dims.key_blocks, dims.heads, dims.head_dim,
        s0, t0, rows, cols, tile.scores.data(),
    };

    const ScoreKernel resolved = resolve_score_kernel(kernel, dims.head_dim);
#if defined(CSAIDX_X86_KERNELS)
    if (resolved == ScoreKernel::avx2) {
        detail::score_avx2(args, mode);
    } else {
        detail::score_scalar(args, mode);
    }
#else
    (void)resolved;
    detail::score_scalar(args, mode);
#endif

    if (mode == AccumulationMode::fp32) {
        // Finite inputs can still overflow the fp32 accumulator at absurd
        // magnitudes; surface that instead of selecting on garbage. The fp16
        // path saturates by construction.
        for (float v : tile.scores) {
            if (!std::isfinite(v)) {
                throw std::runtime_error("score_tile: non-finite score in fp32 mode");
            }
        }
    }
    return tile;
}

}  // namespace csaidx
