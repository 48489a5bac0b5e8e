#include "csaidx/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>

#include "csaidx/synth.hpp"
#include "csaidx/tensor_io.hpp"

namespace csaidx {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const char* mode_name(AccumulationMode mode) {
    return mode == AccumulationMode::fp32 ? "fp32" : "fp16";
}

const char* ablation_name(Ablation ablation) {
    switch (ablation) {
        case Ablation::none: return "none";
        case Ablation::a1_no_merge: return "a1";
        case Ablation::a2_skip_narrow: return "a2";
    }
    return "unknown";
}

const char* path_name(ExecutionPath path) {
    return path == ExecutionPath::materialize ? "materialize" : "chunked";
}

const char* axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::query_tile: return "cs";
        case SweepAxis::key_tile: return "ct";
        case SweepAxis::top_k: return "k";
    }
    return "unknown";
}

// All CSV emission funnels through these so output is byte-stable for a
// given config and seed. No timing columns; timings are informational and
// stay on stdout.
void append(std::string& out, const char* fmt, ...) __attribute__((format(printf, 2, 3)));
void append(std::string& out, const char* fmt, ...) {
    char buf[256];
    va_list args;
    va_start(args, fmt);
    vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    out += buf;
}

void append_report(std::string& out, const RecallReport& r) {
    append(out, "%" PRId64 ",%.6f,%.6f,%.6f,%.6f", r.rows_evaluated, r.mean_recall,
           r.min_recall, r.pct_rows_perfect, r.pct_rows_below_99);
}

}  // namespace

ProblemDims DimsSpec::resolve() const {
    return ProblemDims::create(batch, seq, ratio, heads, head_dim, top_k);
}

ParityResult run_parity(const ParityConfig& config) {
    ParityResult result;
    result.dims = config.dims.resolve();
    const ProblemDims& dims = result.dims;

    result.auto_decision = choose_path(dims, config.threshold_bytes);

    // The reference path materializes the head-reduced matrix; refuse dims
    // that would not fit a desk budget rather than thrash.
    const uint64_t need = score_matrix_bytes(dims.batch, dims.seq_len, dims.key_blocks);
    if (need > config.budget_bytes) {
        result.refused = true;
        result.refused_bytes = need;
        return result;
    }

    const IndexerInputs inputs = generate_inputs({dims, config.seed, 7168});

    DriverConfig dc;
    dc.tile = config.tile;
    dc.mode = config.mode;
    dc.ablation = config.ablation;
    dc.kernel = config.kernel;
    dc.auto_threshold_bytes = config.threshold_bytes;
    dc.threads = config.threads;

    MemoryLedger chunk_ledger;
    auto t0 = std::chrono::steady_clock::now();
    const TopKResult test = run_chunked(inputs, dims, dc, chunk_ledger, &result.stats);
    result.seconds_chunked = seconds_since(t0);
    result.chunked_peak_bytes = chunk_ledger.peak_bytes();

    MemoryLedger mat_ledger;
    t0 = std::chrono::steady_clock::now();
    const TopKResult reference =
        run_materialize(inputs, dims, config.mode, mat_ledger, config.kernel);
    result.seconds_materialize = seconds_since(t0);
    result.materialize_peak_bytes = mat_ledger.peak_bytes();

    result.report = recall(reference, test);
    return result;
}

std::string parity_csv(const ParityConfig& config, const ParityResult& result) {
    std::string out =
        "batch,seq,key_blocks,heads,head_dim,ratio,topk,cs,ct,mode,ablation,seed,"
        "rows_evaluated,mean_recall,min_recall,pct_rows_perfect,pct_rows_below_99,"
        "auto_path,verdict\n";
    const ProblemDims& d = result.dims;
    append(out, "%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64
                ",%" PRId64 ",%" PRId64 ",%" PRId64 ",%s,%s,%" PRIu64 ",",
           d.batch, d.seq_len, d.key_blocks, d.heads, d.head_dim, d.ratio, d.top_k,
           config.tile.query_tile, config.tile.key_tile, mode_name(config.mode),
           ablation_name(config.ablation), config.seed);
    append_report(out, result.report);
    append(out, ",%s,%s\n", path_name(result.auto_decision.path),
           result.refused ? "REFUSED" : (result.pass() ? "PASS" : "FAIL"));
    return out;
}

bool SweepResult::pass() const {
    if (rows.empty()) return false;
    for (const SweepRow& row : rows) {
        if (!row.report.perfect()) return false;
    }
    return true;
}

SweepResult run_sweep(const SweepConfig& config) {
    if (config.values.empty()) {
        throw std::invalid_argument("sweep: no axis values");
    }
    SweepResult result;
    result.dims = config.dims.resolve();

    // Inputs do not depend on the swept axis, so generate once per size.
    const IndexerInputs inputs = generate_inputs({result.dims, config.seed, 7168});
    DimsSpec small_spec = config.dims;
    small_spec.seq = config.recall_seq;
    const ProblemDims small_dims_base = small_spec.resolve();
    const IndexerInputs small_inputs = generate_inputs({small_dims_base, config.seed, 7168});

    for (int64_t value : config.values) {
        SweepRow row;
        row.axis_value = value;
        row.tile = config.tile;
        ProblemDims dims = result.dims;
        switch (config.axis) {
            case SweepAxis::query_tile: row.tile.query_tile = value; break;
            case SweepAxis::key_tile: row.tile.key_tile = value; break;
            case SweepAxis::top_k: dims.top_k = value; break;
        }
        row.top_k = dims.top_k;

        DriverConfig dc;
        dc.tile = row.tile;
        dc.kernel = config.kernel;
        dc.threads = config.threads;
        dc.auto_threshold_bytes = config.threshold_bytes;
        // The dispatch column promises the full tile grid; the causal skip
        // would undercount it.
        dc.causal_early_exit = false;

        MemoryLedger ledger;
        RunStats stats;
        const auto t0 = std::chrono::steady_clock::now();
        (void)run_chunked(inputs, dims, dc, ledger, &stats);
        row.seconds = seconds_since(t0);

        row.dispatch_count = stats.dispatch_count;
        if (row.dispatch_count != dispatch_count_model(dims, row.tile)) {
            throw std::logic_error("sweep: dispatch count disagrees with the model");
        }

        const int64_t eff_cs = std::min(row.tile.query_tile, dims.seq_len);
        const int64_t eff_ct = std::min(row.tile.key_tile, dims.key_blocks);
        row.tile_bytes = chunk_tile_bytes(dims.batch, eff_cs, eff_ct);
        row.peak_model_bytes =
            chunked_peak_model_bytes(dims.batch, {eff_cs, eff_ct}, dims.top_k, false);
        row.ledger_peak_bytes = ledger.peak_bytes();

        // Recall column at an oracle-feasible size, same tiling and k.
        ProblemDims small_dims = small_dims_base;
        small_dims.top_k = dims.top_k;
        DriverConfig small_dc = dc;
        small_dc.causal_early_exit = true;
        MemoryLedger small_ledger;
        const TopKResult small_test = run_chunked(small_inputs, small_dims, small_dc, small_ledger);
        const TopKResult small_ref = run_materialize(small_inputs, small_dims,
                                                     AccumulationMode::fp32, small_ledger,
                                                     config.kernel);
        row.report = recall(small_ref, small_test);

        result.rows.push_back(std::move(row));
    }
    return result;
}

std::string sweep_csv(const SweepConfig& config, const SweepResult& result) {
    std::string out =
        "axis,value,cs,ct,topk,batch,seq,key_blocks,heads,head_dim,dispatch_count,"
        "tile_bytes,peak_model_bytes,ledger_peak_bytes,recall_seq,rows_evaluated,"
        "mean_recall,min_recall,pct_rows_perfect,pct_rows_below_99\n";
    const ProblemDims& d = result.dims;
    for (const SweepRow& row : result.rows) {
        append(out, "%s,%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64
                    ",%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64
                    ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRId64 ",",
               axis_name(config.axis), row.axis_value, row.tile.query_tile,
               row.tile.key_tile, row.top_k, d.batch, d.seq_len, d.key_blocks, d.heads,
               d.head_dim, row.dispatch_count, row.tile_bytes, row.peak_model_bytes,
               row.ledger_peak_bytes, config.recall_seq);
        append_report(out, row.report);
        out += "\n";
    }
    return out;
}

const AblateRow& AblateResult::row(const std::string& variant) const {
    for (const AblateRow& r : rows) {
        if (r.variant == variant) return r;
    }
    throw std::invalid_argument("ablate: unknown variant " + variant);
}

bool AblateResult::pass() const {
    return !rows.empty() && row("production").report.perfect() &&
           row("a2_control").report.perfect();
}

AblateResult run_ablate(const AblateConfig& config) {
    AblateResult result;
    result.dims = config.dims.resolve();
    const ProblemDims& dims = result.dims;
    const IndexerInputs inputs = generate_inputs({dims, config.seed, 7168});

    MemoryLedger ledger;
    const TopKResult reference =
        run_materialize(inputs, dims, AccumulationMode::fp32, ledger, config.kernel);

    struct VariantSpec {
        const char* name;
        TileConfig tile;
        AccumulationMode mode;
        Ablation ablation;
    };
    const TileConfig narrow{config.tile.query_tile, config.a2_key_tile};
    const VariantSpec variants[] = {
        {"production", config.tile, AccumulationMode::fp32, Ablation::none},
        {"a1", config.tile, AccumulationMode::fp32, Ablation::a1_no_merge},
        {"a2", narrow, AccumulationMode::fp32, Ablation::a2_skip_narrow},
        {"a2_control", narrow, AccumulationMode::fp32, Ablation::none},
        {"fp16", config.tile, AccumulationMode::fp16_emulated, Ablation::none},
    };

    for (const VariantSpec& v : variants) {
        DriverConfig dc;
        dc.tile = v.tile;
        dc.mode = v.mode;
        dc.ablation = v.ablation;
        dc.kernel = config.kernel;
        dc.threads = config.threads;
        MemoryLedger run_ledger;
        const TopKResult test = run_chunked(inputs, dims, dc, run_ledger);
        AblateRow row;
        row.variant = v.name;
        row.tile = v.tile;
        row.mode = v.mode;
        row.ablation = v.ablation;
        row.report = recall(reference, test);
        result.rows.push_back(std::move(row));
    }
    return result;
}

std::string ablate_csv(const AblateConfig& config, const AblateResult& result) {
    std::string out =
        "variant,cs,ct,mode,ablation,rows_evaluated,mean_recall,min_recall,"
        "pct_rows_perfect,pct_rows_below_99\n";
    (void)config;
    for (const AblateRow& row : result.rows) {
        append(out, "%s,%" PRId64 ",%" PRId64 ",%s,%s,", row.variant.c_str(),
               row.tile.query_tile, row.tile.key_tile, mode_name(row.mode),
               ablation_name(row.ablation));
        append_report(out, row.report);
        out += "\n";
    }
    return out;
}

MemmodelResult run_memmodel(const MemmodelConfig& config) {
    if (config.seqs.empty()) {
        throw std::invalid_argument("memmodel: no sequence lengths");
    }
    MemmodelResult result;
    result.config = config;
    for (int64_t seq : config.seqs) {
        DimsSpec spec = config.dims;
        spec.seq = seq;
        const ProblemDims dims = spec.resolve();
        MemmodelRow row;
        row.seq = seq;
        row.key_blocks = dims.key_blocks;
        row.intermediate_bytes = materialize_bytes(dims);
        row.materialize_peak_bytes = materialize_peak_bytes(dims);
        row.score_matrix_bytes = score_matrix_bytes(dims.batch, dims.seq_len, dims.key_blocks);
        const int64_t eff_cs = std::min(config.tile.query_tile, dims.seq_len);
        const int64_t eff_ct = std::min(config.tile.key_tile, dims.key_blocks);
        row.chunk_tile_bytes = chunk_tile_bytes(dims.batch, eff_cs, eff_ct);
        row.run_buffer_bytes = run_buffer_bytes(dims.batch, eff_cs, dims.top_k);
        row.chunk_peak_model_bytes =
            chunked_peak_model_bytes(dims.batch, {eff_cs, eff_ct}, dims.top_k, false);
        row.oom = row.intermediate_bytes > config.budget_bytes ||
                  row.materialize_peak_bytes > config.budget_bytes;
        result.rows.push_back(row);
    }
    return result;
}

std::string memmodel_csv(const MemmodelResult& result) {
    std::string out =
        "seq,key_blocks,heads,head_dim,topk,cs,ct,budget_bytes,intermediate_bytes,"
        "materialize_peak_bytes,score_matrix_bytes,chunk_tile_bytes,run_buffer_bytes,"
        "chunk_peak_model_bytes,verdict\n";
    const MemmodelConfig& c = result.config;
    for (const MemmodelRow& row : result.rows) {
        append(out, "%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64
                    ",%" PRId64 ",%" PRId64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64
                    ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%s\n",
               row.seq, row.key_blocks, c.dims.heads, c.dims.head_dim, c.dims.top_k,
               c.tile.query_tile, c.tile.key_tile, c.budget_bytes, row.intermediate_bytes,
               row.materialize_peak_bytes, row.score_matrix_bytes, row.chunk_tile_bytes,
               row.run_buffer_bytes, row.chunk_peak_model_bytes,
               row.oom ? "oom" : "fits");
    }
    return out;
}

uint64_t run_gen(const GenConfig& config) {
    if (config.out_path.empty()) {
        throw std::invalid_argument("gen: output path required");
    }
    const ProblemDims dims = config.dims.resolve();
    const IndexerInputs inputs = generate_inputs({dims, config.seed, 7168});
    return write_inputs_file(config.out_path, inputs, dims);
}

}  // namespace csaidx
