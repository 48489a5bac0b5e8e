#include "csaidx/causal.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace csaidx {

int64_t t_legal(int64_t t, int64_t ratio) {
    if (t < 0 || ratio < 1) {
        throw std::invalid_argument("t_legal: t must be >= 0 and ratio >= 1");
    }
    return (t + 1) / ratio;
}

int64_t k_eff(int64_t t, int64_t ratio, int64_t top_k) {
    if (top_k < 0) {
        throw std::invalid_argument("k_eff: top_k must be >= 0");
    }
    return std::min(top_k, t_legal(t, ratio));
}

bool tile_fully_masked(int64_t s0, int64_t rows, int64_t t0, int64_t ratio) {
    if (rows < 1) {
        throw std::invalid_argument("tile_fully_masked: rows must be >= 1");
    }
    return t0 >= t_legal(s0 + rows - 1, ratio);
}

void mask_tile(ScoreTile& tile, int64_t ratio) {
    constexpr float kNegInf = -std::numeric_limits<float>::infinity();
    for (int64_t b = 0; b < tile.batch; ++b) {
        for (int64_t i = 0; i < tile.rows; ++i) {
            const int64_t legal = t_legal(tile.s0 + i, ratio);
            // Columns [legal - t0, cols) are in the row's future.
            const int64_t first_masked = std::clamp<int64_t>(legal - tile.t0, 0, tile.cols);
            float* row = tile.row(b, i);
            std::fill(row + first_masked, row + tile.cols, kNegInf);
        }
    }
}

MaskTile build_mask_tile(int64_t s0, int64_t t0, int64_t rows, int64_t cols,
                         int64_t ratio, MemoryLedger& ledger) {
    if (rows < 1 || cols < 1 || s0 < 0 || t0 < 0) {
        throw std::invalid_argument("build_mask_tile: bad tile extents");
    }
    MaskTile mask;
    mask.rows = rows;
    mask.cols = cols;
    mask.s0 = s0;
    mask.t0 = t0;
    mask.charge = LedgerCharge(ledger, "mask_tile",
                               static_cast<uint64_t>(rows) * static_cast<uint64_t>(cols));
    mask.keep.assign(rows * cols, 0);
    for (int64_t i = 0; i < rows; ++i) {
        const int64_t legal = t_legal(s0 + i, ratio);
        const int64_t keep_until = std::clamp<int64_t>(legal - t0, 0, cols);
        std::fill_n(mask.keep.begin() + i * cols, keep_until, uint8_t{1});
    }
    return mask;
}

void apply_mask_tile(ScoreTile& tile, const MaskTile& mask) {
    if (mask.rows != tile.rows || mask.cols != tile.cols || mask.s0 != tile.s0 ||
        mask.t0 != tile.t0) {
        throw std::invalid_argument("apply_mask_tile: mask does not match tile");
    }
    constexpr float kNegInf = -std::numeric_limits<float>::infinity();
    for (int64_t b = 0; b < tile.batch; ++b) {
        for (int64_t i = 0; i < tile.rows; ++i) {
            float* row = tile.row(b, i);
            const uint8_t* keep = mask.keep.data() + i * tile.cols;
            for (int64_t j = 0; j < tile.cols; ++j) {
                if (keep[j] == 0) row[j] = kNegInf;
            }
        }
    }
}

}  // namespace csaidx
