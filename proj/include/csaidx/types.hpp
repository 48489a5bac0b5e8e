#pragma once

#include <cstdint>
#include <vector>

#include "csaidx/memory_ledger.hpp"

namespace csaidx {

// Index padding value for rows whose causal prefix holds fewer than k blocks.
inline constexpr int64_t kSentinelIndex = -1;

// Logical size of one (score, index) selection entry: fp32 score + int64
// index. Byte models and ledger charges both use it.
inline constexpr uint64_t kTopKEntryBytes = 12;

// Shape of one indexer instance. key_blocks is always seq_len / ratio; the
// factory rejects a seq_len that is not an exact multiple.
struct ProblemDims {
    int64_t batch = 1;      // B
    int64_t seq_len = 1;    // S, query positions
    int64_t key_blocks = 1; // T = S / ratio, compressed keys
    int64_t heads = 1;      // H_I, indexer heads
    int64_t head_dim = 1;   // d_h
    int64_t ratio = 1;      // m, tokens per compressed block
    int64_t top_k = 1;      // k, blocks selected per query

    static ProblemDims create(int64_t batch, int64_t seq_len, int64_t ratio,
                              int64_t heads, int64_t head_dim, int64_t top_k);

    [[nodiscard]] int64_t q_elems() const { return batch * seq_len * heads * head_dim; }
    [[nodiscard]] int64_t kc_elems() const { return batch * key_blocks * head_dim; }
    [[nodiscard]] int64_t w_elems() const { return batch * seq_len * heads; }
};

// Query-tile / key-tile extents for the chunked driver. Values larger than
// the instance extents are clamped at run time, never rejected.
struct TileConfig {
    int64_t query_tile = 2048;  // c_S
    int64_t key_tile = 8192;    // c_T

    void validate() const;  // both must be >= 1
};

// Dense fp32 operands, row major:
//   q  [B, S, H_I, d_h]   per-head queries
//   kc [B, T, d_h]        compressed keys, shared across heads
//   w  [B, S, H_I]        per-head mixing weights
struct IndexerInputs {
    std::vector<float> q;
    std::vector<float> kc;
    std::vector<float> w;

    // Checks extents against dims and rejects non-finite entries.
    static IndexerInputs validated(std::vector<float> q, std::vector<float> kc,
                                   std::vector<float> w, const ProblemDims& dims);
};

// Selected block indices per query, descending by the selection order.
// Rows with fewer than k legal blocks are padded with (-1, -inf).
struct TopKResult {
    int64_t batch = 0;
    int64_t seq_len = 0;
    int64_t top_k = 0;
    std::vector<int64_t> indices;  // [B, S, k]
    std::vector<float> values;     // [B, S, k]

    static TopKResult sized(const ProblemDims& dims);

    [[nodiscard]] int64_t* index_row(int64_t b, int64_t t);
    [[nodiscard]] const int64_t* index_row(int64_t b, int64_t t) const;
    [[nodiscard]] float* value_row(int64_t b, int64_t t);
    [[nodiscard]] const float* value_row(int64_t b, int64_t t) const;

    // Leading non-sentinel entries of one row.
    [[nodiscard]] int64_t valid_count(int64_t b, int64_t t) const;
};

// Running per-query selection state for one query tile: parallel value/index
// arrays per row, descending, initialized to (-inf, -1) placeholders. Charged
// to the ledger for its whole lifetime.
struct TopKBuffer {
    int64_t batch = 0;
    int64_t rows = 0;
    int64_t top_k = 0;
    std::vector<float> run_v;
    std::vector<int64_t> run_i;
    LedgerCharge charge;

    TopKBuffer(int64_t batch, int64_t rows, int64_t top_k, MemoryLedger& ledger);

    [[nodiscard]] float* v_row(int64_t b, int64_t i);
    [[nodiscard]] const float* v_row(int64_t b, int64_t i) const;
    [[nodiscard]] int64_t* i_row(int64_t b, int64_t i);
    [[nodiscard]] const int64_t* i_row(int64_t b, int64_t i) const;
};

// Byte models. All arithmetic is overflow checked and throws
// std::overflow_error rather than wrapping.

// Per-head score intermediate [B, S, H_I, T] in fp32.
uint64_t score_intermediate_bytes(int64_t batch, int64_t seq_len, int64_t heads,
                                  int64_t key_blocks);
uint64_t materialize_bytes(const ProblemDims& dims);

// Peak of the materialized path: the per-head intermediate plus its weighted
// copy, both live until the head reduction completes.
uint64_t materialize_peak_bytes(const ProblemDims& dims);

// Head-reduced score matrix [B, S, T] in fp32 (what run_materialize actually
// allocates on a desk machine).
uint64_t score_matrix_bytes(int64_t batch, int64_t seq_len, int64_t key_blocks);

// One fp32 score tile [B, c_S, c_T].
uint64_t chunk_tile_bytes(int64_t batch, int64_t query_tile, int64_t key_tile);

// Running selection buffer for one query tile: B * c_S * k entries.
uint64_t run_buffer_bytes(int64_t batch, int64_t query_tile, int64_t top_k);

// Per-tile selection scratch: B * c_S * min(k, c_T) entries.
uint64_t tile_scratch_bytes(int64_t batch, int64_t query_tile, int64_t key_tile,
                            int64_t top_k);

// Upper bound on ledger peak of a single-threaded chunked run: tile + scratch
// + running buffer (+ boolean mask tile when that mode is on). Independent of
// S and T by construction.
uint64_t chunked_peak_model_bytes(int64_t batch, const TileConfig& tile,
                                  int64_t top_k, bool bool_mask_tile);

}  // namespace csaidx
