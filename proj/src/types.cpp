#include "csaidx/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace csaidx {

namespace {

uint64_t checked_mul(uint64_t a, uint64_t b) {
    uint64_t out;
    if (__builtin_mul_overflow(a, b, &out)) {
        throw std::overflow_error("byte model: size product overflows 64 bits");
    }
    return out;
}

uint64_t checked_add(uint64_t a, uint64_t b) {
    uint64_t out;
    if (__builtin_add_overflow(a, b, &out)) {
        throw std::overflow_error("byte model: size sum overflows 64 bits");
    }
    return out;
}

uint64_t positive(int64_t v, const char* name) {
    if (v < 1) {
        throw std::invalid_argument(std::string(name) + " must be >= 1");
    }
    return static_cast<uint64_t>(v);
}

void check_finite(const std::vector<float>& data, const char* name) {
    for (float v : data) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string("IndexerInputs: non-finite entry in ") + name);
        }
    }
}

}  // namespace

ProblemDims ProblemDims::create(int64_t batch, int64_t seq_len, int64_t ratio,
                                int64_t heads, int64_t head_dim, int64_t top_k) {
    positive(batch, "batch");
    positive(seq_len, "seq_len");
    positive(ratio, "ratio");
    positive(heads, "heads");
    positive(head_dim, "head_dim");
    positive(top_k, "top_k");
    if (seq_len % ratio != 0) {
        throw std::invalid_argument("seq_len must be an exact multiple of ratio");
    }
    ProblemDims dims;
    dims.batch = batch;
    dims.seq_len = seq_len;
    dims.key_blocks = seq_len / ratio;
    dims.heads = heads;
    dims.head_dim = head_dim;
    dims.ratio = ratio;
    dims.top_k = top_k;
    return dims;
}

void TileConfig::validate() const {
    positive(query_tile, "query_tile");
    positive(key_tile, "key_tile");
}

IndexerInputs IndexerInputs::validated(std::vector<float> q, std::vector<float> kc,
                                       std::vector<float> w, const ProblemDims& dims) {
    if (static_cast<int64_t>(q.size()) != dims.q_elems()) {
        throw std::invalid_argument("IndexerInputs: q extent mismatch");
    }
    if (static_cast<int64_t>(kc.size()) != dims.kc_elems()) {
        throw std::invalid_argument("IndexerInputs: kc extent mismatch");
    }
    if (static_cast<int64_t>(w.size()) != dims.w_elems()) {
        throw std::invalid_argument("IndexerInputs: w extent mismatch");
    }
    check_finite(q, "q");
    check_finite(kc, "kc");
    check_finite(w, "w");
    IndexerInputs inputs;
    inputs.q = std::move(q);
    inputs.kc = std::move(kc);
    inputs.w = std::move(w);
    return inputs;
}

TopKResult TopKResult::sized(const ProblemDims& dims) {
    TopKResult out;
    out.batch = dims.batch;
    out.seq_len = dims.seq_len;
    out.top_k = dims.top_k;
    const int64_t n = dims.batch * dims.seq_len * dims.top_k;
    out.indices.assign(n, kSentinelIndex);
    out.values.assign(n, -std::numeric_limits<float>::infinity());
    return out;
}

int64_t* TopKResult::index_row(int64_t b, int64_t t) {
    return indices.data() + (b * seq_len + t) * top_k;
}
const int64_t* TopKResult::index_row(int64_t b, int64_t t) const {
    return indices.data() + (b * seq_len + t) * top_k;
}
float* TopKResult::value_row(int64_t b, int64_t t) {
    return values.data() + (b * seq_len + t) * top_k;
}
const float* TopKResult::value_row(int64_t b, int64_t t) const {
    return values.data() + (b * seq_len + t) * top_k;
}

int64_t TopKResult::valid_count(int64_t b, int64_t t) const {
    const int64_t* row = index_row(b, t);
    int64_t n = 0;
    while (n < top_k && row[n] != kSentinelIndex) ++n;
    return n;
}

TopKBuffer::TopKBuffer(int64_t batch_, int64_t rows_, int64_t top_k_, MemoryLedger& ledger)
    : batch(batch_), rows(rows_), top_k(top_k_) {
    positive(batch_, "batch");
    positive(rows_, "rows");
    positive(top_k_, "top_k");
    const int64_t n = batch * rows * top_k;
    charge = LedgerCharge(ledger, "topk_buffer", run_buffer_bytes(batch, rows, top_k));
    run_v.assign(n, -std::numeric_limits<float>::infinity());
    run_i.assign(n, kSentinelIndex);
}

float* TopKBuffer::v_row(int64_t b, int64_t i) {
    return run_v.data() + (b * rows + i) * top_k;
}
const float* TopKBuffer::v_row(int64_t b, int64_t i) const {
    return run_v.data() + (b * rows + i) * top_k;
}
int64_t* TopKBuffer::i_row(int64_t b, int64_t i) {
    return run_i.data() + (b * rows + i) * top_k;
}
const int64_t* TopKBuffer::i_row(int64_t b, int64_t i) const {
    return run_i.data() + (b * rows + i) * top_k;
}

uint64_t score_intermediate_bytes(int64_t batch, int64_t seq_len, int64_t heads,
                                  int64_t key_blocks) {
    uint64_t n = checked_mul(positive(batch, "batch"), positive(seq_len, "seq_len"));
    n = checked_mul(n, positive(heads, "heads"));
    n = checked_mul(n, positive(key_blocks, "key_blocks"));
    return checked_mul(n, sizeof(float));
}

uint64_t materialize_bytes(const ProblemDims& dims) {
    return score_intermediate_bytes(dims.batch, dims.seq_len, dims.heads, dims.key_blocks);
}

uint64_t materialize_peak_bytes(const ProblemDims& dims) {
    const uint64_t intermediate = materialize_bytes(dims);
    return checked_add(intermediate, intermediate);
}

uint64_t score_matrix_bytes(int64_t batch, int64_t seq_len, int64_t key_blocks) {
    uint64_t n = checked_mul(positive(batch, "batch"), positive(seq_len, "seq_len"));
    n = checked_mul(n, positive(key_blocks, "key_blocks"));
    return checked_mul(n, sizeof(float));
}

uint64_t chunk_tile_bytes(int64_t batch, int64_t query_tile, int64_t key_tile) {
    uint64_t n = checked_mul(positive(batch, "batch"), positive(query_tile, "query_tile"));
    n = checked_mul(n, positive(key_tile, "key_tile"));
    return checked_mul(n, sizeof(float));
}

uint64_t run_buffer_bytes(int64_t batch, int64_t query_tile, int64_t top_k) {
    uint64_t n = checked_mul(positive(batch, "batch"), positive(query_tile, "query_tile"));
    n = checked_mul(n, positive(top_k, "top_k"));
    return checked_mul(n, kTopKEntryBytes);
}

uint64_t tile_scratch_bytes(int64_t batch, int64_t query_tile, int64_t key_tile,
                            int64_t top_k) {
    const uint64_t width = std::min(positive(top_k, "top_k"),
                                    positive(key_tile, "key_tile"));
    uint64_t n = checked_mul(positive(batch, "batch"), positive(query_tile, "query_tile"));
    n = checked_mul(n, width);
    return checked_mul(n, kTopKEntryBytes);
}

uint64_t chunked_peak_model_bytes(int64_t batch, const TileConfig& tile,
                                  int64_t top_k, bool bool_mask_tile) {
    tile.validate();
    uint64_t total = chunk_tile_bytes(batch, tile.query_tile, tile.key_tile);
    total = checked_add(total, tile_scratch_bytes(batch, tile.query_tile, tile.key_tile, top_k));
    total = checked_add(total, run_buffer_bytes(batch, tile.query_tile, top_k));
    if (bool_mask_tile) {
        total = checked_add(total, checked_mul(static_cast<uint64_t>(tile.query_tile),
                                               static_cast<uint64_t>(tile.key_tile)));
    }
    return total;
}

}  // namespace csaidx
