#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csaidx/harness.hpp"

namespace {

using namespace csaidx;

AccumulationMode parse_mode(const std::string& s) {
    return s == "fp16" ? AccumulationMode::fp16_emulated : AccumulationMode::fp32;
}

Ablation parse_ablation(const std::string& s) {
    if (s == "a1") return Ablation::a1_no_merge;
    if (s == "a2") return Ablation::a2_skip_narrow;
    return Ablation::none;
}

ScoreKernel parse_kernel(const std::string& s) {
    if (s == "scalar") return ScoreKernel::scalar;
    if (s == "avx2") return ScoreKernel::avx2;
    return ScoreKernel::auto_detect;
}

SweepAxis parse_axis(const std::string& s) {
    if (s == "cs") return SweepAxis::query_tile;
    if (s == "k") return SweepAxis::top_k;
    return SweepAxis::key_tile;
}

double gib(uint64_t bytes) { return static_cast<double>(bytes) / (1024.0 * 1024.0 * 1024.0); }

void add_dims_flags(CLI::App* cmd, DimsSpec& dims) {
    cmd->add_option("--batch", dims.batch, "Batch size B")->capture_default_str();
    cmd->add_option("--seq", dims.seq, "Sequence length S")->capture_default_str();
    cmd->add_option("--heads", dims.heads, "Indexer heads H_I")->capture_default_str();
    cmd->add_option("--head-dim", dims.head_dim, "Head dimension d_h")->capture_default_str();
    cmd->add_option("--ratio", dims.ratio, "Tokens per compressed block m")->capture_default_str();
    cmd->add_option("--topk", dims.top_k, "Selected blocks per query k")->capture_default_str();
}

void write_out(const std::string& path, const std::string& csv) {
    if (path.empty()) return;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open output file " + path);
    os << csv;
    if (!os.flush()) throw std::runtime_error("write failed for " + path);
    std::printf("wrote %s\n", path.c_str());
}

void print_report(const RecallReport& r) {
    std::printf("rows=%" PRId64 " mean=%.6f min=%.6f perfect=%.2f%% below99=%.2f%%\n",
                r.rows_evaluated, r.mean_recall, r.min_recall, r.pct_rows_perfect,
                r.pct_rows_below_99);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"csaidx: chunked sparse-attention indexer selection harness"};
    app.require_subcommand(1);
    app.set_config("--config");

    const std::vector<std::string> modes{"fp32", "fp16"};
    const std::vector<std::string> ablations{"none", "a1", "a2"};
    const std::vector<std::string> kernels{"auto", "scalar", "avx2"};
    const std::vector<std::string> axes{"cs", "ct", "k"};

    // parity: chunked vs materialized on the same inputs, exact-recall gate.
    ParityConfig parity;
    std::string parity_mode = "fp32", parity_ablation = "none", parity_kernel = "auto";
    std::string parity_out;
    CLI::App* cmd_parity = app.add_subcommand("parity", "Compare chunked against materialized");
    add_dims_flags(cmd_parity, parity.dims);
    cmd_parity->add_option("--cs", parity.tile.query_tile, "Query tile c_S")->capture_default_str();
    cmd_parity->add_option("--ct", parity.tile.key_tile, "Key tile c_T")->capture_default_str();
    cmd_parity->add_option("--mode", parity_mode, "Accumulation mode")
        ->check(CLI::IsMember(modes))->capture_default_str();
    cmd_parity->add_option("--ablation", parity_ablation, "Ablation variant")
        ->check(CLI::IsMember(ablations))->capture_default_str();
    cmd_parity->add_option("--kernel", parity_kernel, "Score kernel")
        ->check(CLI::IsMember(kernels))->capture_default_str();
    cmd_parity->add_option("--seed", parity.seed, "Generator seed")->capture_default_str();
    cmd_parity->add_option("--threads", parity.threads, "Query-tile workers")->capture_default_str();
    cmd_parity->add_option("--threshold-bytes", parity.threshold_bytes,
                           "Auto-dispatch threshold")->capture_default_str();
    cmd_parity->add_option("--budget-bytes", parity.budget_bytes,
                           "Refuse reference runs needing more than this")->capture_default_str();
    cmd_parity->add_option("--out", parity_out, "CSV output path");

    // sweep: tiling/k sweep reporting dispatch counts, byte model, recall.
    SweepConfig sweep;
    std::string sweep_axis = "ct", sweep_kernel = "auto", sweep_out;
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "Sweep a tiling axis");
    add_dims_flags(cmd_sweep, sweep.dims);
    cmd_sweep->add_option("--cs", sweep.tile.query_tile, "Query tile c_S")->capture_default_str();
    cmd_sweep->add_option("--ct", sweep.tile.key_tile, "Key tile c_T")->capture_default_str();
    cmd_sweep->add_option("--axis", sweep_axis, "Swept axis")
        ->check(CLI::IsMember(axes))->capture_default_str();
    cmd_sweep->add_option("--values", sweep.values, "Axis values")
        ->delimiter(',')->capture_default_str();
    cmd_sweep->add_option("--recall-seq", sweep.recall_seq,
                          "Sequence length for the recall column")->capture_default_str();
    cmd_sweep->add_option("--kernel", sweep_kernel, "Score kernel")
        ->check(CLI::IsMember(kernels))->capture_default_str();
    cmd_sweep->add_option("--seed", sweep.seed, "Generator seed")->capture_default_str();
    cmd_sweep->add_option("--threads", sweep.threads, "Query-tile workers")->capture_default_str();
    cmd_sweep->add_option("--threshold-bytes", sweep.threshold_bytes,
                          "Auto-dispatch threshold")->capture_default_str();
    cmd_sweep->add_option("--out", sweep_out, "CSV output path");

    // ablate: production vs broken variants against the fp32 reference.
    AblateConfig ablate;
    std::string ablate_kernel = "auto", ablate_out;
    CLI::App* cmd_ablate = app.add_subcommand("ablate", "Run ablation variants");
    add_dims_flags(cmd_ablate, ablate.dims);
    cmd_ablate->add_option("--cs", ablate.tile.query_tile, "Query tile c_S")->capture_default_str();
    cmd_ablate->add_option("--ct", ablate.tile.key_tile, "Key tile c_T")->capture_default_str();
    cmd_ablate->add_option("--a2-ct", ablate.a2_key_tile,
                           "Key tile for the skip-narrow variant")->capture_default_str();
    cmd_ablate->add_option("--kernel", ablate_kernel, "Score kernel")
        ->check(CLI::IsMember(kernels))->capture_default_str();
    cmd_ablate->add_option("--seed", ablate.seed, "Generator seed")->capture_default_str();
    cmd_ablate->add_option("--threads", ablate.threads, "Query-tile workers")->capture_default_str();
    cmd_ablate->add_option("--out", ablate_out, "CSV output path");

    // memmodel: analytic byte model across sequence lengths.
    MemmodelConfig memmodel;
    std::string memmodel_out;
    CLI::App* cmd_memmodel = app.add_subcommand("memmodel", "Analytic memory model");
    cmd_memmodel->add_option("--batch", memmodel.dims.batch, "Batch size B")->capture_default_str();
    cmd_memmodel->add_option("--seq", memmodel.seqs, "Sequence lengths")
        ->delimiter(',')->capture_default_str();
    cmd_memmodel->add_option("--heads", memmodel.dims.heads, "Indexer heads H_I")->capture_default_str();
    cmd_memmodel->add_option("--head-dim", memmodel.dims.head_dim, "Head dimension d_h")->capture_default_str();
    cmd_memmodel->add_option("--ratio", memmodel.dims.ratio, "Tokens per compressed block m")->capture_default_str();
    cmd_memmodel->add_option("--topk", memmodel.dims.top_k, "Selected blocks per query k")->capture_default_str();
    cmd_memmodel->add_option("--cs", memmodel.tile.query_tile, "Query tile c_S")->capture_default_str();
    cmd_memmodel->add_option("--ct", memmodel.tile.key_tile, "Key tile c_T")->capture_default_str();
    cmd_memmodel->add_option("--budget-bytes", memmodel.budget_bytes, "Memory budget")->capture_default_str();
    cmd_memmodel->add_option("--out", memmodel_out, "CSV output path");

    // gen: write synthetic inputs to a tensor dump.
    GenConfig gen;
    CLI::App* cmd_gen = app.add_subcommand("gen", "Generate synthetic inputs");
    add_dims_flags(cmd_gen, gen.dims);
    cmd_gen->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
    cmd_gen->add_option("--out", gen.out_path, "Output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_parity->parsed()) {
            parity.mode = parse_mode(parity_mode);
            parity.ablation = parse_ablation(parity_ablation);
            parity.kernel = parse_kernel(parity_kernel);
            const ParityResult result = run_parity(parity);
            if (result.refused) {
                std::fprintf(stderr,
                             "parity: refused, reference needs %" PRIu64
                             " bytes (%.2f GiB) against a %" PRIu64 " byte budget\n",
                             result.refused_bytes, gib(result.refused_bytes),
                             parity.budget_bytes);
                return 2;
            }
            std::printf("parity S=%" PRId64 " T=%" PRId64 " auto_path=%s\n",
                        result.dims.seq_len, result.dims.key_blocks,
                        result.auto_decision.path == ExecutionPath::materialize
                            ? "materialize" : "chunked");
            std::printf("chunked: %.2fs peak=%.3f GiB dispatches=%" PRId64 "\n",
                        result.seconds_chunked, gib(result.chunked_peak_bytes),
                        result.stats.dispatch_count);
            std::printf("materialize: %.2fs peak=%.3f GiB\n", result.seconds_materialize,
                        gib(result.materialize_peak_bytes));
            print_report(result.report);
            write_out(parity_out, parity_csv(parity, result));
            std::printf("%s\n", result.pass() ? "PASS" : "FAIL");
            return result.pass() ? 0 : 1;
        }
        if (cmd_sweep->parsed()) {
            sweep.axis = parse_axis(sweep_axis);
            sweep.kernel = parse_kernel(sweep_kernel);
            const SweepResult result = run_sweep(sweep);
            for (const SweepRow& row : result.rows) {
                std::printf("%s=%" PRId64 ": dispatches=%" PRId64 " tile=%.3f GiB "
                            "peak=%.3f GiB (%.2fs) recall mean=%.6f min=%.6f\n",
                            sweep_axis.c_str(), row.axis_value, row.dispatch_count,
                            gib(row.tile_bytes), gib(row.ledger_peak_bytes), row.seconds,
                            row.report.mean_recall, row.report.min_recall);
            }
            write_out(sweep_out, sweep_csv(sweep, result));
            std::printf("%s\n", result.pass() ? "PASS" : "FAIL");
            return result.pass() ? 0 : 1;
        }
        if (cmd_ablate->parsed()) {
            ablate.kernel = parse_kernel(ablate_kernel);
            const AblateResult result = run_ablate(ablate);
            for (const AblateRow& row : result.rows) {
                std::printf("%-10s cs=%" PRId64 " ct=%" PRId64 " ", row.variant.c_str(),
                            row.tile.query_tile, row.tile.key_tile);
                print_report(row.report);
            }
            write_out(ablate_out, ablate_csv(ablate, result));
            std::printf("%s\n", result.pass() ? "PASS" : "FAIL");
            return result.pass() ? 0 : 1;
        }
        if (cmd_memmodel->parsed()) {
            const MemmodelResult result = run_memmodel(memmodel);
            for (const MemmodelRow& row : result.rows) {
                std::printf("S=%-7" PRId64 " intermediate=%9.2f GiB peak=%9.2f GiB "
                            "chunk_peak=%.4f GiB %s\n",
                            row.seq, gib(row.intermediate_bytes),
                            gib(row.materialize_peak_bytes),
                            gib(row.chunk_peak_model_bytes),
                            row.oom ? "OOM" : "fits");
            }
            write_out(memmodel_out, memmodel_csv(result));
            return 0;
        }
        if (cmd_gen->parsed()) {
            const uint64_t bytes = run_gen(gen);
            std::printf("wrote %s (%" PRIu64 " bytes)\n", gen.out_path.c_str(), bytes);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
