#include "csaidx/topk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace csaidx {

namespace {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

// Heap comparator: with cmp = succ the std heap routines keep the
// succ-minimum at the front, which is exactly the entry a better offer
// evicts. sort_heap then yields descending order under succ.
struct HeapCmp {
    bool operator()(const ScoredIndex& a, const ScoredIndex& b) const { return succ(a, b); }
};

// Bounded offer into a raw row of storage acting as the heap. Returns the new
// size. Keeps at most cap entries, so scratch never exceeds the charged
// width.
inline int64_t heap_offer(ScoredIndex* heap, int64_t size, int64_t cap, ScoredIndex entry) {
    if (size < cap) {
        heap[size++] = entry;
        std::push_heap(heap, heap + size, HeapCmp{});
        return size;
    }
    if (succ(entry, heap[0])) {
        std::pop_heap(heap, heap + size, HeapCmp{});
        heap[size - 1] = entry;
        std::push_heap(heap, heap + size, HeapCmp{});
    }
    return size;
}

void check_no_overlap(const int64_t* bi, int64_t k,
                      std::span<const ScoredIndex> tile_list) {
    thread_local std::vector<int64_t> scratch;
    scratch.clear();
    for (int64_t n = 0; n < k; ++n) {
        if (bi[n] != kSentinelIndex) scratch.push_back(bi[n]);
    }
    for (const ScoredIndex& e : tile_list) {
        if (e.index != kSentinelIndex) scratch.push_back(e.index);
    }
    std::sort(scratch.begin(), scratch.end());
    if (std::adjacent_find(scratch.begin(), scratch.end()) != scratch.end()) {
        throw std::invalid_argument("merge_topk: overlapping indices between buffer and tile");
    }
}

}  // namespace

BoundedTopK::BoundedTopK(int64_t capacity) : capacity_(capacity) {
    if (capacity < 1) {
        throw std::invalid_argument("BoundedTopK: capacity must be >= 1");
    }
    heap_.reserve(capacity);
}

void BoundedTopK::offer(ScoredIndex entry) {
    if (static_cast<int64_t>(heap_.size()) < capacity_) {
        heap_.push_back(entry);
        std::push_heap(heap_.begin(), heap_.end(), HeapCmp{});
    } else if (succ(entry, heap_.front())) {
        std::pop_heap(heap_.begin(), heap_.end(), HeapCmp{});
        heap_.back() = entry;
        std::push_heap(heap_.begin(), heap_.end(), HeapCmp{});
    }
    if (static_cast<int64_t>(heap_.size()) > capacity_) {
        throw std::logic_error("BoundedTopK: heap exceeded capacity");
    }
}

void BoundedTopK::reset() { heap_.clear(); }

std::vector<ScoredIndex> BoundedTopK::take_sorted() {
    std::sort_heap(heap_.begin(), heap_.end(), HeapCmp{});
    std::vector<ScoredIndex> out = std::move(heap_);
    heap_.clear();
    return out;
}

std::vector<ScoredIndex> streaming_topk(std::span<const ScoredIndex> stream, int64_t k) {
    if (k < 1) {
        throw std::invalid_argument("streaming_topk: k must be >= 1");
    }
    {
        thread_local std::vector<int64_t> seen;
        seen.clear();
        for (const ScoredIndex& e : stream) seen.push_back(e.index);
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
            throw std::invalid_argument("streaming_topk: duplicate index in stream");
        }
    }
    BoundedTopK heap(std::min<int64_t>(k, std::max<int64_t>(1, stream.size())));
    for (const ScoredIndex& e : stream) heap.offer(e);
    return heap.take_sorted();
}

TileTopK tile_topk(const ScoreTile& tile, int64_t top_k, MemoryLedger& ledger) {
    if (top_k < 1) {
        throw std::invalid_argument("tile_topk: top_k must be >= 1");
    }
    TileTopK out;
    out.batch = tile.batch;
    out.rows = tile.rows;
    out.width = std::min(top_k, tile.cols);
    out.charge = LedgerCharge(
        ledger, "tile_topk_scratch",
        tile_scratch_bytes(tile.batch, tile.rows, tile.cols, top_k));
    out.entries.resize(tile.batch * tile.rows * out.width);

    // Each output row doubles as the heap storage, so the scratch charged
    // above is the whole footprint.
    for (int64_t b = 0; b < tile.batch; ++b) {
        for (int64_t i = 0; i < tile.rows; ++i) {
            const float* scores = tile.row(b, i);
            ScoredIndex* row = out.entries.data() + (b * out.rows + i) * out.width;
            int64_t size = 0;
            for (int64_t j = 0; j < tile.cols; ++j) {
                size = heap_offer(row, size, out.width, {scores[j], tile.t0 + j});
            }
            std::sort_heap(row, row + size, HeapCmp{});
        }
    }
    return out;
}

void merge_topk(TopKBuffer& buf, int64_t b, int64_t row,
                std::span<const ScoredIndex> tile_list) {
    const int64_t k = buf.top_k;
    float* bv = buf.v_row(b, row);
    int64_t* bi = buf.i_row(b, row);
    check_no_overlap(bi, k, tile_list);

    // Dry pass: count how many tile entries enter the merged top-k. The
    // buffer keeps a prefix of itself, so the real merge can run backward in
    // place without scratch.
    int64_t from_tile = 0;
    int64_t from_buf = 0;
    const int64_t tn = static_cast<int64_t>(tile_list.size());
    for (int64_t pos = 0; pos < k; ++pos) {
        if (from_tile < tn &&
            (from_buf >= k ||
             succ(tile_list[from_tile], {bv[from_buf], bi[from_buf]}))) {
            ++from_tile;
        } else {
            ++from_buf;
        }
    }

    int64_t i = from_buf - 1;
    int64_t j = from_tile - 1;
    for (int64_t pos = k - 1; pos >= 0; --pos) {
        const bool take_tile =
            j >= 0 && (i < 0 || succ({bv[i], bi[i]}, tile_list[j]));
        if (take_tile) {
            bv[pos] = tile_list[j].score;
            bi[pos] = tile_list[j].index;
            --j;
        } else {
            bv[pos] = bv[i];
            bi[pos] = bi[i];
            --i;
        }
    }
}

void overwrite_topk(TopKBuffer& buf, int64_t b, int64_t row,
                    std::span<const ScoredIndex> tile_list) {
    const int64_t k = buf.top_k;
    float* bv = buf.v_row(b, row);
    int64_t* bi = buf.i_row(b, row);
    int64_t n = 0;
    for (const ScoredIndex& e : tile_list) {
        if (n == k) break;
        if (e.score == kNegInf) continue;  // placeholder, sentinel-ize
        bv[n] = e.score;
        bi[n] = e.index;
        ++n;
    }
    for (; n < k; ++n) {
        bv[n] = kNegInf;
        bi[n] = kSentinelIndex;
    }
}

std::vector<ScoredIndex> oracle_topk(std::span<const float> row_scores, int64_t k,
                                     int64_t legal) {
    if (k < 1 || legal < 0 || legal > static_cast<int64_t>(row_scores.size())) {
        throw std::invalid_argument("oracle_topk: bad k or legal prefix");
    }
    std::vector<ScoredIndex> all(legal);
    for (int64_t j = 0; j < legal; ++j) {
        all[j] = {row_scores[j], j};
    }
    const int64_t take = std::min(k, legal);
    std::partial_sort(all.begin(), all.begin() + take, all.end(), HeapCmp{});
    all.resize(take);
    return all;
}

}  // namespace csaidx
