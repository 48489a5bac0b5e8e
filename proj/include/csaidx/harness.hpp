#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csaidx/driver.hpp"
#include "csaidx/recall.hpp"
#include "csaidx/types.hpp"

namespace csaidx {

// Command-layer entry points. The CLI is a thin flag parser over these so
// tests can drive the exact same code paths in process. Each CSV writer
// produces a byte-stable string for a given config and seed; wall-clock
// timings go to the human-readable summaries only, never into CSV.

struct DimsSpec {
    int64_t batch = 1;
    int64_t seq = 2048;
    int64_t heads = 64;
    int64_t head_dim = 128;
    int64_t ratio = 4;
    int64_t top_k = 512;

    [[nodiscard]] ProblemDims resolve() const;
};

struct ParityConfig {
    DimsSpec dims{};
    TileConfig tile{256, 256};
    AccumulationMode mode = AccumulationMode::fp32;
    Ablation ablation = Ablation::none;
    ScoreKernel kernel = ScoreKernel::auto_detect;
    int threads = 1;
    uint64_t seed = 1;
    uint64_t threshold_bytes = uint64_t{1} << 30;
    // Refuse instead of allocating a score matrix beyond this.
    uint64_t budget_bytes = uint64_t{4} << 30;
};

struct ParityResult {
    ProblemDims dims;
    bool refused = false;
    uint64_t refused_bytes = 0;  // analytic estimate printed on refusal
    RecallReport report;
    DispatchDecision auto_decision{ExecutionPath::chunked, 0};
    RunStats stats;
    uint64_t chunked_peak_bytes = 0;
    uint64_t materialize_peak_bytes = 0;
    double seconds_chunked = 0.0;
    double seconds_materialize = 0.0;

    [[nodiscard]] bool pass() const { return !refused && report.perfect(); }
};

ParityResult run_parity(const ParityConfig& config);
std::string parity_csv(const ParityConfig& config, const ParityResult& result);

enum class SweepAxis { query_tile, key_tile, top_k };

struct SweepConfig {
    DimsSpec dims{1, 16384, 2, 8, 4, 512};
    TileConfig tile{2048, 1024};
    SweepAxis axis = SweepAxis::key_tile;
    std::vector<int64_t> values{1024, 1536, 2048, 4096};
    int64_t recall_seq = 2048;  // oracle-feasible size for the recall column
    ScoreKernel kernel = ScoreKernel::auto_detect;
    int threads = 1;
    uint64_t seed = 1;
    uint64_t threshold_bytes = uint64_t{1} << 30;
};

struct SweepRow {
    int64_t axis_value = 0;
    TileConfig tile{};
    int64_t top_k = 0;
    int64_t dispatch_count = 0;
    uint64_t tile_bytes = 0;
    uint64_t peak_model_bytes = 0;
    uint64_t ledger_peak_bytes = 0;
    RecallReport report;
    double seconds = 0.0;
};

struct SweepResult {
    ProblemDims dims;
    std::vector<SweepRow> rows;

    [[nodiscard]] bool pass() const;  // every recall column perfect
};

SweepResult run_sweep(const SweepConfig& config);
std::string sweep_csv(const SweepConfig& config, const SweepResult& result);

struct AblateConfig {
    DimsSpec dims{1, 2048, 8, 64, 4, 64};
    TileConfig tile{256, 128};
    int64_t a2_key_tile = 32;  // tile width for the skip-narrow variant
    ScoreKernel kernel = ScoreKernel::auto_detect;
    int threads = 1;
    uint64_t seed = 1;
};

struct AblateRow {
    std::string variant;
    TileConfig tile{};
    AccumulationMode mode = AccumulationMode::fp32;
    Ablation ablation = Ablation::none;
    RecallReport report;
};

struct AblateResult {
    ProblemDims dims;
    std::vector<AblateRow> rows;  // production, a1, a2, a2_control, fp16

    [[nodiscard]] const AblateRow& row(const std::string& variant) const;
    // Gate: the non-ablated rows (production, a2_control) must be perfect.
    [[nodiscard]] bool pass() const;
};

AblateResult run_ablate(const AblateConfig& config);
std::string ablate_csv(const AblateConfig& config, const AblateResult& result);

struct MemmodelConfig {
    DimsSpec dims{1, 32768, 64, 128, 4, 512};  // seq ignored; seqs below
    std::vector<int64_t> seqs{32768, 65536, 131072, 262144};
    TileConfig tile{2048, 8192};
    uint64_t budget_bytes = uint64_t{140} << 30;
};

struct MemmodelRow {
    int64_t seq = 0;
    int64_t key_blocks = 0;
    uint64_t intermediate_bytes = 0;      // per-head score intermediate
    uint64_t materialize_peak_bytes = 0;  // intermediate + weighted copy
    uint64_t score_matrix_bytes = 0;      // head-reduced matrix
    uint64_t chunk_tile_bytes = 0;
    uint64_t run_buffer_bytes = 0;
    uint64_t chunk_peak_model_bytes = 0;
    bool oom = false;  // materialized path exceeds the budget
};

struct MemmodelResult {
    MemmodelConfig config;
    std::vector<MemmodelRow> rows;
};

MemmodelResult run_memmodel(const MemmodelConfig& config);
std::string memmodel_csv(const MemmodelResult& result);

struct GenConfig {
    DimsSpec dims{1, 2048, 64, 128, 4, 512};
    uint64_t seed = 1;
    std::string out_path;
};

// Generates the synthetic inputs and writes the three-section dump.
uint64_t run_gen(const GenConfig& config);

}  // namespace csaidx
