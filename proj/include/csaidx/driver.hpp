#pragma once

#include <cstdint>

#include "csaidx/memory_ledger.hpp"
#include "csaidx/score.hpp"
#include "csaidx/types.hpp"

namespace csaidx {

enum class Ablation {
    none,
    // A1: drop the running merge; each processed key tile overwrites the
    // buffer row, so only the last processed tile survives.
    a1_no_merge,
    // A2: skip any key tile narrower than k entirely.
    a2_skip_narrow,
};

enum class ExecutionPath {
    materialize,
    chunked,
};

struct DriverConfig {
    TileConfig tile{};
    AccumulationMode mode = AccumulationMode::fp32;
    Ablation ablation = Ablation::none;
    ScoreKernel kernel = ScoreKernel::auto_detect;

    // Materialize below this per-head-intermediate size, chunk above it.
    uint64_t auto_threshold_bytes = uint64_t{1} << 30;

    // Stop scanning key tiles once the whole tile is in the causal future of
    // every row of the query tile. Result-identical for merge-based runs;
    // under A1 it changes which tile is "last", so it stays on by default and
    // is part of that ablation's definition.
    bool causal_early_exit = true;

    // Build an explicit boolean mask tile (ledger visible) instead of writing
    // -inf in place.
    bool bool_mask_tile = false;

    // Query tiles are row-disjoint, so they can run concurrently; results are
    // bit-identical to the serial schedule. Ledger peaks are only guaranteed
    // bounded for threads == 1.
    int threads = 1;
};

struct DispatchDecision {
    ExecutionPath path;
    uint64_t predicted_bytes;  // per-head intermediate that drove the choice
};

struct RunStats {
    int64_t dispatch_count = 0;        // score_tile invocations
    int64_t tiles_skipped_masked = 0;  // early-exit skips
    int64_t tiles_skipped_narrow = 0;  // A2 skips
};

// Number of score-tile dispatches a full chunked pass issues with the causal
// early exit off: ceil(S/c_S) * ceil(T/c_T) with tiles clamped to the
// instance extents.
int64_t dispatch_count_model(const ProblemDims& dims, const TileConfig& tile);

// Streaming partition-merge pass: per query tile, scan key tiles in
// ascending t0, select per tile, merge into the running buffer, then
// sentinel-pad. Peak transient memory is bounded by chunked_peak_model_bytes
// regardless of S.
TopKResult run_chunked(const IndexerInputs& inputs, const ProblemDims& dims,
                       const DriverConfig& config, MemoryLedger& ledger,
                       RunStats* stats = nullptr);

// Reference path: materializes the full head-reduced score matrix
// (batch*S*T*4 bytes charged), masks it, and selects per row with the sort
// oracle. Same score kernels and summation order as the chunked path.
TopKResult run_materialize(const IndexerInputs& inputs, const ProblemDims& dims,
                           AccumulationMode mode, MemoryLedger& ledger,
                           ScoreKernel kernel = ScoreKernel::auto_detect);

DispatchDecision choose_path(const ProblemDims& dims, uint64_t threshold_bytes);

// Auto-detecting entry point: materializes when the per-head intermediate
// fits under config.auto_threshold_bytes, otherwise chunks. Whether the
// materialized buffer fits in RAM is the caller's problem; the threshold only
// mirrors what a desk machine tolerates.
TopKResult dispatch(const IndexerInputs& inputs, const ProblemDims& dims,
                    const DriverConfig& config, MemoryLedger& ledger,
                    DispatchDecision* decision = nullptr, RunStats* stats = nullptr);

}  // namespace csaidx
