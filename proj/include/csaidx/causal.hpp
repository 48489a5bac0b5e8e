#pragma once

#include <cstdint>

#include "csaidx/memory_ledger.hpp"
#include "csaidx/score.hpp"

namespace csaidx {

// Number of compressed blocks fully inside the past of query t: block j
// covers tokens [j*m, (j+1)*m), so exactly floor((t+1)/m) blocks are legal.
int64_t t_legal(int64_t t, int64_t ratio);

// min(top_k, t_legal): how many entries of a selection row are real.
int64_t k_eff(int64_t t, int64_t ratio, int64_t top_k);

// True when every row of the tile has no legal column, i.e.
// t0 >= t_legal(s0 + rows - 1). Lets the driver stop scanning key tiles.
bool tile_fully_masked(int64_t s0, int64_t rows, int64_t t0, int64_t ratio);

// Writes -inf over scores[b, i, j] wherever t0+j >= t_legal(s0+i). In place;
// allocates nothing.
void mask_tile(ScoreTile& tile, int64_t ratio);

// Explicit boolean tile (1 = keep), shared across the batch since legality
// depends only on (s, t). Exists to surface the O(c_S * c_T) mask footprint
// on the ledger; mask_tile is the default path.
struct MaskTile {
    int64_t rows = 0;
    int64_t cols = 0;
    int64_t s0 = 0;
    int64_t t0 = 0;
    std::vector<uint8_t> keep;  // [rows, cols]
    LedgerCharge charge;
};

MaskTile build_mask_tile(int64_t s0, int64_t t0, int64_t rows, int64_t cols,
                         int64_t ratio, MemoryLedger& ledger);
void apply_mask_tile(ScoreTile& tile, const MaskTile& mask);

}  // namespace csaidx
