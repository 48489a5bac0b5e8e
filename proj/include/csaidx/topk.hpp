#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csaidx/memory_ledger.hpp"
#include "csaidx/score.hpp"
#include "csaidx/types.hpp"

namespace csaidx {

struct ScoredIndex {
    float score;
    int64_t index;

    friend bool operator==(const ScoredIndex&, const ScoredIndex&) = default;
};

// Strict total order used by every selection stage: higher score wins, score
// ties go to the smaller index. Total on distinct (score, index) pairs, which
// is what makes the top-k set unique and merge results deterministic.
[[nodiscard]] inline bool succ(const ScoredIndex& a, const ScoredIndex& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
}

// Bounded selection heap: a min-heap under succ that never holds more than
// its capacity, so scratch stays O(k) however long the stream is.
class BoundedTopK {
public:
    explicit BoundedTopK(int64_t capacity);

    void offer(ScoredIndex entry);
    void reset();

    [[nodiscard]] int64_t size() const { return static_cast<int64_t>(heap_.size()); }
    [[nodiscard]] int64_t capacity() const { return capacity_; }
    [[nodiscard]] std::span<const ScoredIndex> entries() const { return heap_; }

    // Drains the heap into descending order under succ.
    [[nodiscard]] std::vector<ScoredIndex> take_sorted();

private:
    int64_t capacity_;
    std::vector<ScoredIndex> heap_;
};

// Top-min(k, n) of a finite stream under succ, returned sorted descending
// (semantically a set; the order is a convenience). The result does not
// depend on the stream order. Duplicate indices in the stream throw
// std::invalid_argument.
std::vector<ScoredIndex> streaming_topk(std::span<const ScoredIndex> stream, int64_t k);

// Per-row top-min(k, cols) of a score tile, indices offset by t0. Rows whose
// entries are all -inf still yield entries (placeholder scores with real
// indices); the merge discards them and the final sentinel pass never sees
// them. Scratch is charged as batch * rows * min(k, cols) entries.
struct TileTopK {
    int64_t batch = 0;
    int64_t rows = 0;
    int64_t width = 0;  // min(k, cols)
    std::vector<ScoredIndex> entries;  // [B, rows, width], each row descending
    LedgerCharge charge;

    [[nodiscard]] std::span<const ScoredIndex> row(int64_t b, int64_t i) const {
        return {entries.data() + (b * rows + i) * width, static_cast<size_t>(width)};
    }
};

TileTopK tile_topk(const ScoreTile& tile, int64_t top_k, MemoryLedger& ledger);

// Merges one tile row (descending under succ) into the running buffer row,
// keeping the top-k of the union. In place, no allocation. Overlapping
// non-sentinel indices between the two lists throw std::invalid_argument.
void merge_topk(TopKBuffer& buf, int64_t b, int64_t row,
                std::span<const ScoredIndex> tile_list);

// Ablation A1 replacement for merge_topk: unconditionally overwrites the
// buffer row with the tile row (placeholder entries become sentinels).
void overwrite_topk(TopKBuffer& buf, int64_t b, int64_t row,
                    std::span<const ScoredIndex> tile_list);

// Ground-truth selection for one fully materialized score row: sorts the
// legal prefix [0, legal) under succ and returns the top-min(k, legal),
// descending. Quadratic-free reference for every streaming/tiled variant.
std::vector<ScoredIndex> oracle_topk(std::span<const float> row_scores, int64_t k,
                                     int64_t legal);

}  // namespace csaidx
