#include "csaidx/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "csaidx/causal.hpp"
#include "csaidx/topk.hpp"

namespace csaidx {

namespace {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

struct ClampedTiles {
    int64_t c_s;
    int64_t c_t;
};

ClampedTiles clamp_tiles(const ProblemDims& dims, const TileConfig& tile) {
    tile.validate();
    return {std::min(tile.query_tile, dims.seq_len), std::min(tile.key_tile, dims.key_blocks)};
}

// One query tile: scan key tiles ascending, select per tile, fold into the
// running buffer, then sentinel-pad into the output rows.
void process_query_tile(const IndexerInputs& inputs, const ProblemDims& dims,
                        const DriverConfig& config, const ClampedTiles& tiles,
                        int64_t s0, MemoryLedger& ledger, TopKResult& out,
                        RunStats& stats) {
    const int64_t rows = std::min(tiles.c_s, dims.seq_len - s0);
    const int64_t k = dims.top_k;
    TopKBuffer buf(dims.batch, rows, k, ledger);

    for (int64_t t0 = 0; t0 < dims.key_blocks; t0 += tiles.c_t) {
        const int64_t cols = std::min(tiles.c_t, dims.key_blocks - t0);
        if (config.ablation == Ablation::a2_skip_narrow && cols < k) {
            ++stats.tiles_skipped_narrow;
            continue;
        }
        if (config.causal_early_exit && tile_fully_masked(s0, rows, t0, dims.ratio)) {
            // Legality is monotone in t0, so everything after this tile is
            // masked too.
            stats.tiles_skipped_masked += ceil_div(dims.key_blocks - t0, tiles.c_t);
            break;
        }

        ScoreTile tile = score_tile(inputs, dims, s0, t0, rows, cols, config.mode,
                                    ledger, config.kernel);
        ++stats.dispatch_count;

        if (config.bool_mask_tile) {
            MaskTile mask = build_mask_tile(s0, t0, rows, cols, dims.ratio, ledger);
            apply_mask_tile(tile, mask);
        } else {
            mask_tile(tile, dims.ratio);
        }

        TileTopK selected = tile_topk(tile, k, ledger);
        for (int64_t b = 0; b < dims.batch; ++b) {
            for (int64_t i = 0; i < rows; ++i) {
                if (config.ablation == Ablation::a1_no_merge) {
                    overwrite_topk(buf, b, i, selected.row(b, i));
                } else {
                    merge_topk(buf, b, i, selected.row(b, i));
                }
            }
        }
    }

    // Sentinel pass: placeholders become (-inf, -1); under production
    // semantics each row must hold exactly k_eff real entries, all ahead of
    // the sentinels. Ablations deliberately drop entries, so they only keep
    // the ordering property.
    for (int64_t b = 0; b < dims.batch; ++b) {
        for (int64_t i = 0; i < rows; ++i) {
            float* bv = buf.v_row(b, i);
            int64_t* bi = buf.i_row(b, i);
            int64_t valid = 0;
            while (valid < k && bv[valid] != kNegInf) ++valid;
            for (int64_t n = valid; n < k; ++n) {
                if (bv[n] != kNegInf) {
                    throw std::logic_error("run_chunked: sentinel entries do not trail");
                }
                bi[n] = kSentinelIndex;
            }
            if (config.ablation == Ablation::none) {
                const int64_t want = k_eff(s0 + i, dims.ratio, k);
                if (valid != want) {
                    throw std::logic_error("run_chunked: row valid count != k_eff");
                }
            }
            std::memcpy(out.index_row(b, s0 + i), bi, k * sizeof(int64_t));
            std::memcpy(out.value_row(b, s0 + i), bv, k * sizeof(float));
        }
    }
}

}  // namespace

int64_t dispatch_count_model(const ProblemDims& dims, const TileConfig& tile) {
    const ClampedTiles tiles = clamp_tiles(dims, tile);
    return ceil_div(dims.seq_len, tiles.c_s) * ceil_div(dims.key_blocks, tiles.c_t);
}

TopKResult run_chunked(const IndexerInputs& inputs, const ProblemDims& dims,
                       const DriverConfig& config, MemoryLedger& ledger,
                       RunStats* stats_out) {
    const ClampedTiles tiles = clamp_tiles(dims, config.tile);
    TopKResult out = TopKResult::sized(dims);

    std::vector<int64_t> starts;
    for (int64_t s0 = 0; s0 < dims.seq_len; s0 += tiles.c_s) starts.push_back(s0);

    RunStats total;
    const int threads = std::max(1, std::min<int>(config.threads,
                                                  static_cast<int>(starts.size())));
    if (threads == 1) {
        for (int64_t s0 : starts) {
            process_query_tile(inputs, dims, config, tiles, s0, ledger, out, total);
        }
    } else {
        // Contiguous blocks of query tiles per worker; rows are disjoint, so
        // the result does not depend on the schedule.
        std::vector<RunStats> per_thread(threads);
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        const int64_t n = static_cast<int64_t>(starts.size());
        for (int w = 0; w < threads; ++w) {
            const int64_t first = n * w / threads;
            const int64_t last = n * (w + 1) / threads;
            pool.emplace_back([&, w, first, last] {
                try {
                    for (int64_t idx = first; idx < last; ++idx) {
                        process_query_tile(inputs, dims, config, tiles, starts[idx],
                                           ledger, out, per_thread[w]);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (std::thread& t : pool) t.join();
        for (const std::exception_ptr& e : errors) {
            if (e) std::rethrow_exception(e);
        }
        for (const RunStats& s : per_thread) {
            total.dispatch_count += s.dispatch_count;
            total.tiles_skipped_masked += s.tiles_skipped_masked;
            total.tiles_skipped_narrow += s.tiles_skipped_narrow;
        }
    }

    if (stats_out != nullptr) *stats_out = total;
    return out;
}

TopKResult run_materialize(const IndexerInputs& inputs, const ProblemDims& dims,
                           AccumulationMode mode, MemoryLedger& ledger,
                           ScoreKernel kernel) {
    // The whole head-reduced matrix as a single tile, through the same score
    // kernels and summation order as the chunked path.
    ScoreTile full = score_tile(inputs, dims, 0, 0, dims.seq_len, dims.key_blocks,
                                mode, ledger, kernel);
    mask_tile(full, dims.ratio);

    TopKResult out = TopKResult::sized(dims);
    const int64_t k = dims.top_k;
    for (int64_t b = 0; b < dims.batch; ++b) {
        for (int64_t t = 0; t < dims.seq_len; ++t) {
            const int64_t legal = t_legal(t, dims.ratio);
            const std::vector<ScoredIndex> top =
                oracle_topk({full.row(b, t), static_cast<size_t>(dims.key_blocks)}, k, legal);
            int64_t* bi = out.index_row(b, t);
            float* bv = out.value_row(b, t);
            for (size_t n = 0; n < top.size(); ++n) {
                bi[n] = top[n].index;
                bv[n] = top[n].score;
            }
        }
    }
    return out;
}

DispatchDecision choose_path(const ProblemDims& dims, uint64_t threshold_bytes) {
    const uint64_t predicted = materialize_bytes(dims);
    return {predicted <= threshold_bytes ? ExecutionPath::materialize
                                         : ExecutionPath::chunked,
            predicted};
}

TopKResult dispatch(const IndexerInputs& inputs, const ProblemDims& dims,
                    const DriverConfig& config, MemoryLedger& ledger,
                    DispatchDecision* decision_out, RunStats* stats_out) {
    const DispatchDecision decision = choose_path(dims, config.auto_threshold_bytes);
    if (decision_out != nullptr) *decision_out = decision;
    if (decision.path == ExecutionPath::materialize) {
        if (stats_out != nullptr) *stats_out = RunStats{};
        return run_materialize(inputs, dims, config.mode, ledger, config.kernel);
    }
    return run_chunked(inputs, dims, config, ledger, stats_out);
}

}  // namespace csaidx
